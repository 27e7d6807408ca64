#include "ibx/graph.hpp"

#include <algorithm>
#include <cmath>

namespace ibx {

namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

double stable_softplus(double x) {
  // log(1 + e^x) = max(x,0) + log1p(e^{-|x|})
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

}  // namespace

void Graph::check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape " + shape_str(a) + " vs " + shape_str(b));
  }
}

Graph::Var Graph::push(Tensor value, std::vector<int> parents,
                       std::function<void(Graph&, int)> back) {
  Node n;
  n.value = std::move(value);
  n.parents = std::move(parents);
  n.back = std::move(back);
  for (int p : n.parents) {
    if (nodes_[static_cast<std::size_t>(p)].needs_grad) {
      n.needs_grad = true;
      break;
    }
  }
  nodes_.push_back(std::move(n));
  return static_cast<Var>(nodes_.size()) - 1;
}

Tensor& Graph::grad_buf(int idx) {
  Node& n = nodes_[static_cast<std::size_t>(idx)];
  if (!n.grad_alloc) {
    n.grad = Tensor(n.value.shape);
    n.grad_alloc = true;
  }
  return n.grad;
}

void Graph::accumulate(int idx, const Tensor& g) {
  Tensor& buf = grad_buf(idx);
  for (std::size_t i = 0; i < buf.data.size(); ++i) buf.data[i] += g.data[i];
}

Graph::Var Graph::constant(Tensor v) { return push(std::move(v), {}, nullptr); }

Graph::Var Graph::param(const std::string& name, const Tensor& value) {
  auto it = params_.find(name);
  if (it != params_.end()) return it->second;
  Node n;
  n.value = value;
  n.needs_grad = true;
  n.pname = name;
  nodes_.push_back(std::move(n));
  int idx = static_cast<int>(nodes_.size()) - 1;
  params_[name] = idx;
  return idx;
}

const Tensor& Graph::param_grad(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw DimensionError("param_grad: unknown parameter " + name);
  return grad_buf(it->second);
}

std::vector<std::string> Graph::param_names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& [k, v] : params_) out.push_back(k);
  std::sort(out.begin(), out.end());
  return out;
}

Graph::Var Graph::matmul(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.rank() != 2 || B.rank() != 2 || A.cols() != B.rows()) {
    throw DimensionError("matmul: " + shape_str(A) + " x " + shape_str(B));
  }
  std::size_t m = A.rows(), k = A.cols(), n = B.cols();
  Tensor C({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = &A.data[i * k];
    double* crow = &C.data[i * n];
    for (std::size_t p = 0; p < k; ++p) {
      double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = &B.data[p * n];
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return push(std::move(C), {a, b}, [a, b, m, k, n](Graph& g, int self) {
    const Tensor& dC = g.node(self).grad;
    const Tensor& A = g.value(a);
    const Tensor& B = g.value(b);
    if (g.node(a).needs_grad) {
      Tensor& dA = g.grad_buf(a);  // dA += dC * B^T
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          const double* dcrow = &dC.data[i * n];
          const double* brow = &B.data[p * n];
          for (std::size_t j = 0; j < n; ++j) acc += dcrow[j] * brow[j];
          dA.data[i * k + p] += acc;
        }
      }
    }
    if (g.node(b).needs_grad) {
      Tensor& dB = g.grad_buf(b);  // dB += A^T * dC
      for (std::size_t p = 0; p < k; ++p) {
        for (std::size_t i = 0; i < m; ++i) {
          double av = A.data[i * k + p];
          if (av == 0.0) continue;
          const double* dcrow = &dC.data[i * n];
          double* dbrow = &dB.data[p * n];
          for (std::size_t j = 0; j < n; ++j) dbrow[j] += av * dcrow[j];
        }
      }
    }
  });
}

Graph::Var Graph::transpose(Var a) {
  const Tensor& A = value(a);
  if (A.rank() != 2) throw DimensionError("transpose: rank-2 required");
  std::size_t m = A.rows(), n = A.cols();
  Tensor T({n, m});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) T.data[j * m + i] = A.data[i * n + j];
  return push(std::move(T), {a}, [a, m, n](Graph& g, int self) {
    if (!g.node(a).needs_grad) return;
    const Tensor& dT = g.node(self).grad;
    Tensor& dA = g.grad_buf(a);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) dA.data[i * n + j] += dT.data[j * m + i];
  });
}

Graph::Var Graph::add(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  check_same_shape(A, B, "add");
  Tensor C = A;
  for (std::size_t i = 0; i < C.data.size(); ++i) C.data[i] += B.data[i];
  return push(std::move(C), {a, b}, [a, b](Graph& g, int self) {
    const Tensor& dC = g.node(self).grad;
    if (g.node(a).needs_grad) g.accumulate(a, dC);
    if (g.node(b).needs_grad) g.accumulate(b, dC);
  });
}

Graph::Var Graph::sub(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  check_same_shape(A, B, "sub");
  Tensor C = A;
  for (std::size_t i = 0; i < C.data.size(); ++i) C.data[i] -= B.data[i];
  return push(std::move(C), {a, b}, [a, b](Graph& g, int self) {
    const Tensor& dC = g.node(self).grad;
    if (g.node(a).needs_grad) g.accumulate(a, dC);
    if (g.node(b).needs_grad) {
      Tensor& dB = g.grad_buf(b);
      for (std::size_t i = 0; i < dB.data.size(); ++i) dB.data[i] -= dC.data[i];
    }
  });
}

Graph::Var Graph::mul(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  check_same_shape(A, B, "mul");
  Tensor C = A;
  for (std::size_t i = 0; i < C.data.size(); ++i) C.data[i] *= B.data[i];
  return push(std::move(C), {a, b}, [a, b](Graph& g, int self) {
    const Tensor& dC = g.node(self).grad;
    const Tensor& A = g.value(a);
    const Tensor& B = g.value(b);
    if (g.node(a).needs_grad) {
      Tensor& dA = g.grad_buf(a);
      for (std::size_t i = 0; i < dA.data.size(); ++i) dA.data[i] += dC.data[i] * B.data[i];
    }
    if (g.node(b).needs_grad) {
      Tensor& dB = g.grad_buf(b);
      for (std::size_t i = 0; i < dB.data.size(); ++i) dB.data[i] += dC.data[i] * A.data[i];
    }
  });
}

Graph::Var Graph::add_rowvec(Var a, Var bias) {
  const Tensor& A = value(a);
  const Tensor& B = value(bias);
  if (A.rank() != 2 || B.rank() != 1 || B.numel() != A.cols()) {
    throw DimensionError("add_rowvec: " + shape_str(A) + " + " + shape_str(B));
  }
  std::size_t m = A.rows(), n = A.cols();
  Tensor C = A;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) C.data[i * n + j] += B.data[j];
  return push(std::move(C), {a, bias}, [a, bias, m, n](Graph& g, int self) {
    const Tensor& dC = g.node(self).grad;
    if (g.node(a).needs_grad) g.accumulate(a, dC);
    if (g.node(bias).needs_grad) {
      Tensor& dB = g.grad_buf(bias);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) dB.data[j] += dC.data[i * n + j];
    }
  });
}

Graph::Var Graph::mul_colvec(Var a, Var c) {
  const Tensor& A = value(a);
  const Tensor& C = value(c);
  if (A.rank() != 2 || C.rank() != 2 || C.cols() != 1 || C.rows() != A.rows()) {
    throw DimensionError("mul_colvec: " + shape_str(A) + " * " + shape_str(C));
  }
  std::size_t m = A.rows(), n = A.cols();
  Tensor Out = A;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) Out.data[i * n + j] *= C.data[i];
  return push(std::move(Out), {a, c}, [a, c, m, n](Graph& g, int self) {
    const Tensor& dO = g.node(self).grad;
    const Tensor& A = g.value(a);
    const Tensor& C = g.value(c);
    if (g.node(a).needs_grad) {
      Tensor& dA = g.grad_buf(a);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) dA.data[i * n + j] += dO.data[i * n + j] * C.data[i];
    }
    if (g.node(c).needs_grad) {
      Tensor& dC = g.grad_buf(c);
      for (std::size_t i = 0; i < m; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += dO.data[i * n + j] * A.data[i * n + j];
        dC.data[i] += acc;
      }
    }
  });
}

Graph::Var Graph::scale(Var a, double k) {
  Tensor C = value(a);
  for (double& x : C.data) x *= k;
  return push(std::move(C), {a}, [a, k](Graph& g, int self) {
    if (!g.node(a).needs_grad) return;
    const Tensor& dC = g.node(self).grad;
    Tensor& dA = g.grad_buf(a);
    for (std::size_t i = 0; i < dA.data.size(); ++i) dA.data[i] += k * dC.data[i];
  });
}

Graph::Var Graph::add_scalar(Var a, double k) {
  Tensor C = value(a);
  for (double& x : C.data) x += k;
  return push(std::move(C), {a}, [a](Graph& g, int self) {
    if (g.node(a).needs_grad) g.accumulate(a, g.node(self).grad);
  });
}

Graph::Var Graph::square(Var a) {
  Tensor C = value(a);
  for (double& x : C.data) x *= x;
  return push(std::move(C), {a}, [a](Graph& g, int self) {
    if (!g.node(a).needs_grad) return;
    const Tensor& dC = g.node(self).grad;
    const Tensor& A = g.value(a);
    Tensor& dA = g.grad_buf(a);
    for (std::size_t i = 0; i < dA.data.size(); ++i) dA.data[i] += 2.0 * A.data[i] * dC.data[i];
  });
}

Graph::Var Graph::log(Var a) {
  Tensor C = value(a);
  for (double& x : C.data) x = std::log(x);
  return push(std::move(C), {a}, [a](Graph& g, int self) {
    if (!g.node(a).needs_grad) return;
    const Tensor& dC = g.node(self).grad;
    const Tensor& A = g.value(a);
    Tensor& dA = g.grad_buf(a);
    for (std::size_t i = 0; i < dA.data.size(); ++i) dA.data[i] += dC.data[i] / A.data[i];
  });
}

Graph::Var Graph::exp(Var a) {
  Tensor C = value(a);
  for (double& x : C.data) x = std::exp(x);
  return push(std::move(C), {a}, [a](Graph& g, int self) {
    if (!g.node(a).needs_grad) return;
    const Tensor& dC = g.node(self).grad;
    const Tensor& E = g.node(self).value;
    Tensor& dA = g.grad_buf(a);
    for (std::size_t i = 0; i < dA.data.size(); ++i) dA.data[i] += dC.data[i] * E.data[i];
  });
}

Graph::Var Graph::recip(Var a) {
  Tensor C = value(a);
  for (double& x : C.data) x = 1.0 / x;
  return push(std::move(C), {a}, [a](Graph& g, int self) {
    if (!g.node(a).needs_grad) return;
    const Tensor& dC = g.node(self).grad;
    const Tensor& R = g.node(self).value;
    Tensor& dA = g.grad_buf(a);
    for (std::size_t i = 0; i < dA.data.size(); ++i)
      dA.data[i] -= dC.data[i] * R.data[i] * R.data[i];
  });
}

Graph::Var Graph::softplus(Var a) {
  Tensor C = value(a);
  for (double& x : C.data) x = stable_softplus(x);
  return push(std::move(C), {a}, [a](Graph& g, int self) {
    if (!g.node(a).needs_grad) return;
    const Tensor& dC = g.node(self).grad;
    const Tensor& A = g.value(a);
    Tensor& dA = g.grad_buf(a);
    for (std::size_t i = 0; i < dA.data.size(); ++i)
      dA.data[i] += dC.data[i] * stable_sigmoid(A.data[i]);
  });
}

Graph::Var Graph::leaky_relu(Var a, double slope) {
  Tensor C = value(a);
  for (double& x : C.data) x = x > 0.0 ? x : slope * x;
  return push(std::move(C), {a}, [a, slope](Graph& g, int self) {
    if (!g.node(a).needs_grad) return;
    const Tensor& dC = g.node(self).grad;
    const Tensor& A = g.value(a);
    Tensor& dA = g.grad_buf(a);
    for (std::size_t i = 0; i < dA.data.size(); ++i)
      dA.data[i] += dC.data[i] * (A.data[i] > 0.0 ? 1.0 : slope);
  });
}

Graph::Var Graph::clip(Var a, double lo, double hi) {
  Tensor C = value(a);
  for (double& x : C.data) x = std::min(std::max(x, lo), hi);
  return push(std::move(C), {a}, [a, lo, hi](Graph& g, int self) {
    if (!g.node(a).needs_grad) return;
    const Tensor& dC = g.node(self).grad;
    const Tensor& A = g.value(a);
    Tensor& dA = g.grad_buf(a);
    for (std::size_t i = 0; i < dA.data.size(); ++i) {
      if (A.data[i] > lo && A.data[i] < hi) dA.data[i] += dC.data[i];
    }
  });
}

Graph::Var Graph::minimum(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  check_same_shape(A, B, "minimum");
  Tensor C = A;
  for (std::size_t i = 0; i < C.data.size(); ++i) C.data[i] = std::min(A.data[i], B.data[i]);
  return push(std::move(C), {a, b}, [a, b](Graph& g, int self) {
    const Tensor& dC = g.node(self).grad;
    const Tensor& A = g.value(a);
    const Tensor& B = g.value(b);
    // ties route to the first argument
    if (g.node(a).needs_grad) {
      Tensor& dA = g.grad_buf(a);
      for (std::size_t i = 0; i < dA.data.size(); ++i)
        if (A.data[i] <= B.data[i]) dA.data[i] += dC.data[i];
    }
    if (g.node(b).needs_grad) {
      Tensor& dB = g.grad_buf(b);
      for (std::size_t i = 0; i < dB.data.size(); ++i)
        if (A.data[i] > B.data[i]) dB.data[i] += dC.data[i];
    }
  });
}

Graph::Var Graph::l2_normalize_rows(Var a) {
  const Tensor& A = value(a);
  if (A.rank() != 2) throw DimensionError("l2_normalize_rows: rank-2 required");
  std::size_t m = A.rows(), n = A.cols();
  Tensor C = A;
  std::vector<double> norms(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += A.data[i * n + j] * A.data[i * n + j];
    double r = std::sqrt(s);
    norms[i] = r;
    if (r >= 1e-12) {
      for (std::size_t j = 0; j < n; ++j) C.data[i * n + j] /= r;
    }
  }
  return push(std::move(C), {a}, [a, m, n, norms](Graph& g, int self) {
    if (!g.node(a).needs_grad) return;
    const Tensor& dC = g.node(self).grad;
    const Tensor& Y = g.node(self).value;
    Tensor& dA = g.grad_buf(a);
    for (std::size_t i = 0; i < m; ++i) {
      double r = norms[i];
      if (r < 1e-12) {
        // zero rows pass through untouched
        for (std::size_t j = 0; j < n; ++j) dA.data[i * n + j] += dC.data[i * n + j];
        continue;
      }
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += Y.data[i * n + j] * dC.data[i * n + j];
      for (std::size_t j = 0; j < n; ++j)
        dA.data[i * n + j] += (dC.data[i * n + j] - Y.data[i * n + j] * dot) / r;
    }
  });
}

Graph::Var Graph::concat_cols(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.rank() != 2 || B.rank() != 2 || A.rows() != B.rows()) {
    throw DimensionError("concat_cols: " + shape_str(A) + " | " + shape_str(B));
  }
  std::size_t m = A.rows(), p = A.cols(), q = B.cols();
  Tensor C({m, p + q});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < p; ++j) C.data[i * (p + q) + j] = A.data[i * p + j];
    for (std::size_t j = 0; j < q; ++j) C.data[i * (p + q) + p + j] = B.data[i * q + j];
  }
  return push(std::move(C), {a, b}, [a, b, m, p, q](Graph& g, int self) {
    const Tensor& dC = g.node(self).grad;
    if (g.node(a).needs_grad) {
      Tensor& dA = g.grad_buf(a);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < p; ++j) dA.data[i * p + j] += dC.data[i * (p + q) + j];
    }
    if (g.node(b).needs_grad) {
      Tensor& dB = g.grad_buf(b);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < q; ++j) dB.data[i * q + j] += dC.data[i * (p + q) + p + j];
    }
  });
}

Graph::Var Graph::row_sum(Var a) {
  const Tensor& A = value(a);
  if (A.rank() != 2) throw DimensionError("row_sum: rank-2 required");
  std::size_t m = A.rows(), n = A.cols();
  Tensor C({m, 1});
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += A.data[i * n + j];
    C.data[i] = s;
  }
  return push(std::move(C), {a}, [a, m, n](Graph& g, int self) {
    if (!g.node(a).needs_grad) return;
    const Tensor& dC = g.node(self).grad;
    Tensor& dA = g.grad_buf(a);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) dA.data[i * n + j] += dC.data[i];
  });
}

Graph::Var Graph::sum_all(Var a) {
  const Tensor& A = value(a);
  double s = 0.0;
  for (double v : A.data) s += v;
  return push(Tensor::scalar(s), {a}, [a](Graph& g, int self) {
    if (!g.node(a).needs_grad) return;
    double d = g.node(self).grad.data[0];
    Tensor& dA = g.grad_buf(a);
    for (double& x : dA.data) x += d;
  });
}

Graph::Var Graph::mean_all(Var a) {
  const Tensor& A = value(a);
  std::size_t n = A.numel();
  if (n == 0) throw DimensionError("mean_all: empty tensor");
  double s = 0.0;
  for (double v : A.data) s += v;
  return push(Tensor::scalar(s / static_cast<double>(n)), {a}, [a, n](Graph& g, int self) {
    if (!g.node(a).needs_grad) return;
    double d = g.node(self).grad.data[0] / static_cast<double>(n);
    Tensor& dA = g.grad_buf(a);
    for (double& x : dA.data) x += d;
  });
}

namespace {

// Row softmax with the log-sum-exp split as lse = mx + log1p(rest), so that
// log-softmax values (row[j] - mx) - log1p(rest) keep their tiny negative
// tails instead of being absorbed into a large max.
void row_softmax_lse(const double* row, std::size_t n, std::vector<double>& p, double& mx,
                     double& log_rest) {
  mx = row[0];
  std::size_t arg = 0;
  for (std::size_t j = 1; j < n; ++j)
    if (row[j] > mx) mx = row[j], arg = j;
  double rest = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    p[j] = std::exp(row[j] - mx);
    if (j != arg) rest += p[j];
  }
  log_rest = std::log1p(rest);
  double z = 1.0 + rest;
  for (std::size_t j = 0; j < n; ++j) p[j] /= z;
}

}  // namespace

Graph::Var Graph::diag_logsoftmax_mean(Var logits) {
  const Tensor& L = value(logits);
  if (L.rank() != 2 || L.rows() != L.cols() || L.rows() < 2) {
    throw DimensionError("diag_logsoftmax_mean: square logits with K >= 2 required, got " +
                         shape_str(L));
  }
  std::size_t k = L.rows();
  Tensor P({k, k});
  std::vector<double> p(k);
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double mx, log_rest;
    row_softmax_lse(&L.data[i * k], k, p, mx, log_rest);
    acc += (L.data[i * k + i] - mx) - log_rest;
    for (std::size_t j = 0; j < k; ++j) P.data[i * k + j] = p[j];
  }
  double val = acc / static_cast<double>(k);
  return push(Tensor::scalar(val), {logits}, [logits, k, P](Graph& g, int self) {
    if (!g.node(logits).needs_grad) return;
    double d = g.node(self).grad.data[0] / static_cast<double>(k);
    Tensor& dL = g.grad_buf(logits);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        double delta = (i == j) ? 1.0 : 0.0;
        dL.data[i * k + j] += d * (delta - P.data[i * k + j]);
      }
    }
  });
}

Graph::Var Graph::logprob_rows(Var logits, std::vector<int> actions) {
  const Tensor& L = value(logits);
  if (L.rank() != 2) throw DimensionError("logprob_rows: rank-2 logits required");
  std::size_t m = L.rows(), n = L.cols();
  if (actions.size() != m) throw DimensionError("logprob_rows: one action per row required");
  for (int a : actions) {
    if (a < 0 || static_cast<std::size_t>(a) >= n)
      throw DimensionError("logprob_rows: action index out of range");
  }
  Tensor out({m, 1});
  Tensor P({m, n});
  std::vector<double> p(n);
  for (std::size_t i = 0; i < m; ++i) {
    double mx, log_rest;
    row_softmax_lse(&L.data[i * n], n, p, mx, log_rest);
    out.data[i] = (L.data[i * n + static_cast<std::size_t>(actions[i])] - mx) - log_rest;
    for (std::size_t j = 0; j < n; ++j) P.data[i * n + j] = p[j];
  }
  return push(std::move(out), {logits},
              [logits, m, n, P, actions = std::move(actions)](Graph& g, int self) {
                if (!g.node(logits).needs_grad) return;
                const Tensor& dOut = g.node(self).grad;
                Tensor& dL = g.grad_buf(logits);
                for (std::size_t i = 0; i < m; ++i) {
                  double d = dOut.data[i];
                  for (std::size_t j = 0; j < n; ++j) {
                    double delta = (static_cast<std::size_t>(actions[i]) == j) ? 1.0 : 0.0;
                    dL.data[i * n + j] += d * (delta - P.data[i * n + j]);
                  }
                }
              });
}

Graph::Var Graph::entropy_mean(Var logits) {
  const Tensor& L = value(logits);
  if (L.rank() != 2) throw DimensionError("entropy_mean: rank-2 logits required");
  std::size_t m = L.rows(), n = L.cols();
  Tensor P({m, n});
  std::vector<double> h(m, 0.0);
  std::vector<double> p(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double mx, log_rest;
    row_softmax_lse(&L.data[i * n], n, p, mx, log_rest);
    double hi = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      P.data[i * n + j] = p[j];
      if (p[j] > 0.0) hi -= p[j] * std::log(p[j]);
    }
    h[i] = hi;
    acc += hi;
  }
  double val = acc / static_cast<double>(m);
  return push(Tensor::scalar(val), {logits}, [logits, m, n, P, h](Graph& g, int self) {
    if (!g.node(logits).needs_grad) return;
    double d = g.node(self).grad.data[0] / static_cast<double>(m);
    Tensor& dL = g.grad_buf(logits);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double pj = P.data[i * n + j];
        double term = (pj > 0.0) ? -pj * (std::log(pj) + h[i]) : 0.0;
        dL.data[i * n + j] += d * term;
      }
    }
  });
}

void Graph::backward(Var root) {
  Node& r = nodes_[static_cast<std::size_t>(root)];
  if (r.value.numel() != 1) throw DimensionError("backward: root must be scalar");
  grad_buf(root).data[0] = 1.0;
  for (int i = root; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.needs_grad || !n.back || !n.grad_alloc) continue;
    n.back(*this, i);
  }
}

}  // namespace ibx
