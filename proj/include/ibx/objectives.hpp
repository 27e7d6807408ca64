#pragma once

#include <utility>
#include <vector>

#include "ibx/db_model.hpp"
#include "ibx/gaussian.hpp"
#include "ibx/params.hpp"

namespace ibx {

struct LossBreakdown {
  double i_pred = 0.0;
  double i_nce = 0.0;
  double i_upper = 0.0;
  double total = 0.0;  // alpha1*i_upper - alpha2*i_pred - alpha3*i_nce
  std::size_t batch_size = 0;
};

// mean log q(s'|z) over a batch of (s', z) pairs
double loss_i_pred(const std::vector<std::pair<Tensor, Tensor>>& s_next_and_z,
                   const ParamSet& ps, const DBConfig& cfg);
// batch InfoNCE over (z, s') pairs: each item's positive is its own next
// encoding, its negatives are the other rows; K >= 2
double loss_i_nce(const std::vector<std::pair<Tensor, Tensor>>& z_and_s_next,
                  const ParamSet& ps, const DBConfig& cfg);
// mean KL to the standard normal over a batch of posteriors
double loss_i_upper(const std::vector<GaussianDiag>& posteriors);

struct DBBatch {
  Tensor obs;                // [B, obs_dim]
  std::vector<int> actions;  // B
  Tensor next_obs;           // [B, obs_dim]
};

// Records the full training loss on the tape; `eps` is the frozen
// reparameterization noise, [B, latent_dim]. Returns the breakdown and the
// scalar root through `total`.
LossBreakdown db_loss_build(Graph& g, const DBBatch& batch, const ParamSet& ps,
                            const DBConfig& cfg, const Tensor& eps, Graph::Var& total);
// value-only evaluation with frozen noise
LossBreakdown db_loss_eval(const DBBatch& batch, const ParamSet& ps, const DBConfig& cfg,
                           const Tensor& eps);

// one gradient step on {enc_o, post, pred, proj_o, W} followed by the
// momentum update; aborts with params untouched if the loss is non-finite
LossBreakdown db_train_step(const DBBatch& batch, ParamSet& ps, const DBConfig& cfg,
                            AdamOptimizer& opt, RngStream& rng);

struct NceBoundReport {
  double mutual_information = 0.0;
  double l_nce = 0.0;
  double bound = 0.0;  // log N + l_nce
  int negatives = 0;
  bool holds = false;
};

// exact enumeration of the contrastive bound on a small discrete joint:
// checks log N + L_nce(h) <= I(Z;S') + 1e-9
NceBoundReport exact_nce_bound_check(const Tensor& joint, const Tensor& score_table,
                                     int negatives);

}  // namespace ibx
