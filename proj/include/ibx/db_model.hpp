#pragma once

#include <cstdint>
#include <vector>

#include "ibx/gaussian.hpp"
#include "ibx/graph.hpp"
#include "ibx/params.hpp"

namespace ibx {

enum class Branch { online, momentum };

struct DBConfig {
  std::size_t obs_dim = 80;
  std::size_t action_count = 4;
  std::size_t enc_hidden = 128;
  std::size_t encoding_dim = 64;
  std::size_t post_hidden = 64;
  std::size_t latent_dim = 32;
  std::size_t pred_hidden = 64;
  std::size_t proj_hidden = 32;
  std::size_t projection_dim = 16;
  double tau = 0.999;
  double alpha1 = 0.001;  // upper-bound weight
  double alpha2 = 0.1;    // predictive weight
  double alpha3 = 0.1;    // contrastive weight
  double learning_rate = 1e-4;
  // Init gain on the posterior mean head. A dispersed posterior at init is
  // the network analog of the dispersed regression prior in the linear
  // analysis: visited pairs get compressed toward the standard normal by the
  // upper-bound term while unseen pairs keep their initial spread, which is
  // what makes the bonus track visitation.
  double post_init_gain = 3.0;
  // gradient passes over each collected episode batch
  std::size_t updates_per_episode = 1;
  // ablation: one encoder for both time steps, gradients flow into the target
  bool shared_encoder = false;

  void validate() const;
};

// Parameter groups: enc_o/enc_m (observation encoders), post (representation
// posterior), pred (prediction head), proj_o/proj_m (projection heads),
// score.W (bilinear score). Momentum groups enc_m/proj_m mirror their online
// shapes and are only ever written by db_momentum_update.
ParamSet init_db_params(const DBConfig& cfg, RngStream& rng);
std::vector<std::string> db_trainable_names(const DBConfig& cfg);
// theta_m <- tau*theta_m + (1-tau)*theta_o, same for the projector pair
void db_momentum_update(ParamSet& ps, double tau);

// graph builders (batched, rows = batch)
Graph::Var db_encode_g(Graph& g, Graph::Var obs, const ParamSet& ps, const DBConfig& cfg,
                       Branch branch, bool trainable);

struct GaussVars {
  Graph::Var mean;
  Graph::Var std;
};
GaussVars db_posterior_g(Graph& g, Graph::Var s, const std::vector<int>& actions,
                         const ParamSet& ps, const DBConfig& cfg, bool trainable);
GaussVars db_predict_g(Graph& g, Graph::Var z, const ParamSet& ps, const DBConfig& cfg,
                       bool trainable);  // std is a [B,1] shared scale
Graph::Var db_project_g(Graph& g, Graph::Var v, const ParamSet& ps, const DBConfig& cfg,
                        Branch branch, bool trainable);
Graph::Var db_logits_g(Graph& g, Graph::Var u_pred, Graph::Var u_next, const ParamSet& ps,
                       bool trainable);

// single-sample surfaces
Tensor encode(const Tensor& obs, Branch branch, const ParamSet& ps, const DBConfig& cfg);
GaussianDiag posterior(const Tensor& s, int action, const ParamSet& ps, const DBConfig& cfg);
GaussianDiag predict_next(const Tensor& z, const ParamSet& ps, const DBConfig& cfg);
Tensor project(const Tensor& v, Branch branch, const ParamSet& ps, const DBConfig& cfg);
double score(const Tensor& u_pred, const Tensor& u_next, const Tensor& w);

// batched posterior evaluation used by the bonus and the collapse probe
Tensor encode_batch(const Tensor& obs, Branch branch, const ParamSet& ps, const DBConfig& cfg);
void posterior_batch(const Tensor& obs, const std::vector<int>& actions, const ParamSet& ps,
                     const DBConfig& cfg, Tensor& mean_out, Tensor& std_out);

Tensor onehot_rows(const std::vector<int>& indices, std::size_t n);

}  // namespace ibx
