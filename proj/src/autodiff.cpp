#include "corelink/autodiff.hpp"

#include <cassert>
#include <cmath>

#include "corelink/errors.hpp"
#include "corelink/kernels.hpp"

namespace corelink::ad {

Parameter* ParamStore::create(const std::string& name, int rows, int cols) {
  if (by_name_.count(name))
    throw ConfigError("duplicate parameter name: " + name);
  items_.push_back(std::make_unique<Parameter>(name, rows, cols));
  Parameter* p = items_.back().get();
  by_name_[name] = p;
  return p;
}

Parameter* ParamStore::find(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : it->second;
}

void ParamStore::zero_grads() {
  for (auto& p : items_) p->grad.fill(0.0);
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (auto& p : items_) n += p->value.size();
  return n;
}

const Matrix& Var::value() const { return tape->value(id); }
const Matrix& Var::grad() const { return const_cast<Tape*>(tape)->grad(id); }

int Tape::push(Matrix value, bool requires_grad, std::function<void(Tape&)> back) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.grad = Matrix(n.value.rows, n.value.cols);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

Var Tape::constant(Matrix v) { return Var{this, push(std::move(v), false, nullptr)}; }

Var Tape::leaf(Matrix v) { return Var{this, push(std::move(v), true, nullptr)}; }

Var Tape::param(Parameter& p) {
  auto it = param_lookup_.find(&p);
  if (it != param_lookup_.end()) return Var{this, it->second};
  int id = push(p.value, true, nullptr);
  param_lookup_[&p] = id;
  param_nodes_.emplace_back(&p, id);
  return Var{this, id};
}

void Tape::backward(Var loss) {
  assert(loss.tape == this);
  const Matrix& lv = nodes_[loss.id].value;
  if (lv.rows != 1 || lv.cols != 1)
    throw Error("backward() expects a scalar loss node");
  if (!nodes_[loss.id].requires_grad) return;
  nodes_[loss.id].grad(0, 0) = 1.0;
  for (int i = loss.id; i >= 0; --i) {
    if (nodes_[i].requires_grad && nodes_[i].back) nodes_[i].back(*this);
  }
  for (auto& [p, id] : param_nodes_) {
    const Matrix& g = nodes_[id].grad;
    for (std::size_t j = 0; j < g.data.size(); ++j) p->grad.data[j] += g.data[j];
  }
}

namespace {

void accumulate(Matrix& dst, const Matrix& src) {
  assert(dst.same_shape(src));
  for (std::size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += src.data[i];
}

using BackFn = std::function<void(Tape&)>;

Var emit(Tape& t, Matrix value, bool rg, BackFn back) {
  int id = t.push(std::move(value), rg, rg ? std::move(back) : BackFn());
  return Var{&t, id};
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = *a.tape;
  Matrix out = kernels::matmul(a.value(), b.value());
  const bool rg = t.requires_grad(a.id) || t.requires_grad(b.id);
  const int aid = a.id, bid = b.id, self = static_cast<int>(t.node_count());
  return emit(t, std::move(out), rg, [aid, bid, self](Tape& tp) {
    const Matrix& dout = tp.grad(self);
    if (tp.requires_grad(aid))
      accumulate(tp.grad(aid), kernels::matmul_nt(dout, tp.value(bid)));
    if (tp.requires_grad(bid))
      accumulate(tp.grad(bid), kernels::matmul_tn(tp.value(aid), dout));
  });
}

Var matmul_nt(Var a, Var b) {
  Tape& t = *a.tape;
  Matrix out = kernels::matmul_nt(a.value(), b.value());
  const bool rg = t.requires_grad(a.id) || t.requires_grad(b.id);
  const int aid = a.id, bid = b.id, self = static_cast<int>(t.node_count());
  // out = a * b^T; da = dout * b, db = dout^T * a.
  return emit(t, std::move(out), rg, [aid, bid, self](Tape& tp) {
    const Matrix& dout = tp.grad(self);
    if (tp.requires_grad(aid))
      accumulate(tp.grad(aid), kernels::matmul(dout, tp.value(bid)));
    if (tp.requires_grad(bid))
      accumulate(tp.grad(bid), kernels::matmul_tn(dout, tp.value(aid)));
  });
}

Var add(Var a, Var b) {
  Tape& t = *a.tape;
  Matrix out = kernels::add(a.value(), b.value());
  const bool rg = t.requires_grad(a.id) || t.requires_grad(b.id);
  const int aid = a.id, bid = b.id, self = static_cast<int>(t.node_count());
  return emit(t, std::move(out), rg, [aid, bid, self](Tape& tp) {
    const Matrix& dout = tp.grad(self);
    if (tp.requires_grad(aid)) accumulate(tp.grad(aid), dout);
    if (tp.requires_grad(bid)) accumulate(tp.grad(bid), dout);
  });
}

Var add_row_broadcast(Var a, Var bias) {
  Tape& t = *a.tape;
  Matrix out = kernels::add_row_broadcast(a.value(), bias.value());
  const bool rg = t.requires_grad(a.id) || t.requires_grad(bias.id);
  const int aid = a.id, bid = bias.id, self = static_cast<int>(t.node_count());
  return emit(t, std::move(out), rg, [aid, bid, self](Tape& tp) {
    const Matrix& dout = tp.grad(self);
    if (tp.requires_grad(aid)) accumulate(tp.grad(aid), dout);
    if (tp.requires_grad(bid)) {
      Matrix& db = tp.grad(bid);
      for (int i = 0; i < dout.rows; ++i) {
        const double* dr = dout.row_ptr(i);
        for (int j = 0; j < dout.cols; ++j) db(0, j) += dr[j];
      }
    }
  });
}

Var mul_scalar(Var a, double s) {
  Tape& t = *a.tape;
  Matrix out = kernels::scale(a.value(), s);
  const bool rg = t.requires_grad(a.id);
  const int aid = a.id, self = static_cast<int>(t.node_count());
  return emit(t, std::move(out), rg, [aid, s, self](Tape& tp) {
    const Matrix& dout = tp.grad(self);
    Matrix& da = tp.grad(aid);
    for (std::size_t i = 0; i < dout.data.size(); ++i) da.data[i] += s * dout.data[i];
  });
}

Var relu(Var a) {
  Tape& t = *a.tape;
  Matrix out = kernels::relu(a.value());
  const bool rg = t.requires_grad(a.id);
  const int aid = a.id, self = static_cast<int>(t.node_count());
  return emit(t, std::move(out), rg, [aid, self](Tape& tp) {
    const Matrix& dout = tp.grad(self);
    const Matrix& x = tp.value(aid);
    Matrix& da = tp.grad(aid);
    for (std::size_t i = 0; i < dout.data.size(); ++i)
      if (x.data[i] > 0.0) da.data[i] += dout.data[i];
  });
}

Var softmax_rows(Var a) {
  Tape& t = *a.tape;
  Matrix out = kernels::softmax_rows(a.value());
  const bool rg = t.requires_grad(a.id);
  const int aid = a.id, self = static_cast<int>(t.node_count());
  // dx = y * (dy - sum(dy * y)) per row.
  return emit(t, std::move(out), rg, [aid, self](Tape& tp) {
    const Matrix& dout = tp.grad(self);
    const Matrix& y = tp.value(self);
    Matrix& da = tp.grad(aid);
    for (int i = 0; i < y.rows; ++i) {
      const double* yr = y.row_ptr(i);
      const double* dr = dout.row_ptr(i);
      double dot = 0.0;
      for (int j = 0; j < y.cols; ++j) dot += dr[j] * yr[j];
      double* dar = da.row_ptr(i);
      for (int j = 0; j < y.cols; ++j) dar[j] += yr[j] * (dr[j] - dot);
    }
  });
}

Var layer_norm_rows(Var x, Var gamma, Var beta, double eps) {
  Tape& t = *x.tape;
  Matrix out = kernels::layer_norm_rows(x.value(), gamma.value(), beta.value(), eps);
  const bool rg = t.requires_grad(x.id) || t.requires_grad(gamma.id) ||
                  t.requires_grad(beta.id);
  const int xid = x.id, gid = gamma.id, bid = beta.id,
            self = static_cast<int>(t.node_count());
  return emit(t, std::move(out), rg, [xid, gid, bid, eps, self](Tape& tp) {
    const Matrix& dout = tp.grad(self);
    const Matrix& xv = tp.value(xid);
    const Matrix& gv = tp.value(gid);
    const int n = xv.cols;
    for (int i = 0; i < xv.rows; ++i) {
      const double* xr = xv.row_ptr(i);
      const double* dr = dout.row_ptr(i);
      double mean = 0.0;
      for (int j = 0; j < n; ++j) mean += xr[j];
      mean /= n;
      double var = 0.0;
      for (int j = 0; j < n; ++j) {
        const double d = xr[j] - mean;
        var += d * d;
      }
      var /= n;
      const double rstd = 1.0 / std::sqrt(var + eps);

      // xhat = (x - mean) * rstd; y = xhat * gamma + beta
      if (tp.requires_grad(bid)) {
        Matrix& db = tp.grad(bid);
        for (int j = 0; j < n; ++j) db(0, j) += dr[j];
      }
      if (tp.requires_grad(gid)) {
        Matrix& dg = tp.grad(gid);
        for (int j = 0; j < n; ++j) dg(0, j) += dr[j] * (xr[j] - mean) * rstd;
      }
      if (tp.requires_grad(xid)) {
        // dxhat = dy * gamma; dx = rstd * (dxhat - mean(dxhat) - xhat * mean(dxhat * xhat))
        double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
        for (int j = 0; j < n; ++j) {
          const double xhat = (xr[j] - mean) * rstd;
          const double dxhat = dr[j] * gv(0, j);
          sum_dxhat += dxhat;
          sum_dxhat_xhat += dxhat * xhat;
        }
        const double m1 = sum_dxhat / n, m2 = sum_dxhat_xhat / n;
        Matrix& dx = tp.grad(xid);
        double* dxr = dx.row_ptr(i);
        for (int j = 0; j < n; ++j) {
          const double xhat = (xr[j] - mean) * rstd;
          const double dxhat = dr[j] * gv(0, j);
          dxr[j] += rstd * (dxhat - m1 - xhat * m2);
        }
      }
    }
  });
}

Var gather_rows(Var a, std::vector<int> idx) {
  Tape& t = *a.tape;
  Matrix out = corelink::gather_rows(a.value(), idx);
  const bool rg = t.requires_grad(a.id);
  const int aid = a.id, self = static_cast<int>(t.node_count());
  return emit(t, std::move(out), rg, [aid, self, idx = std::move(idx)](Tape& tp) {
    const Matrix& dout = tp.grad(self);
    Matrix& da = tp.grad(aid);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const double* dr = dout.row_ptr(static_cast<int>(i));
      double* dst = da.row_ptr(idx[i]);
      for (int j = 0; j < dout.cols; ++j) dst[j] += dr[j];
    }
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  assert(!parts.empty());
  Tape& t = *parts[0].tape;
  std::vector<Matrix> values;
  std::vector<int> ids;
  bool rg = false;
  for (const Var& p : parts) {
    values.push_back(p.value());
    ids.push_back(p.id);
    rg = rg || t.requires_grad(p.id);
  }
  Matrix out = corelink::concat_cols(values);
  const int self = static_cast<int>(t.node_count());
  return emit(t, std::move(out), rg, [ids = std::move(ids), self](Tape& tp) {
    const Matrix& dout = tp.grad(self);
    int c0 = 0;
    for (int pid : ids) {
      const int w = tp.value(pid).cols;
      if (tp.requires_grad(pid)) {
        Matrix& dp = tp.grad(pid);
        for (int i = 0; i < dout.rows; ++i) {
          const double* dr = dout.row_ptr(i) + c0;
          double* dst = dp.row_ptr(i);
          for (int j = 0; j < w; ++j) dst[j] += dr[j];
        }
      }
      c0 += w;
    }
  });
}

Var concat_rows(const std::vector<Var>& parts) {
  assert(!parts.empty());
  Tape& t = *parts[0].tape;
  std::vector<Matrix> values;
  std::vector<int> ids;
  bool rg = false;
  for (const Var& p : parts) {
    values.push_back(p.value());
    ids.push_back(p.id);
    rg = rg || t.requires_grad(p.id);
  }
  Matrix out = corelink::concat_rows(values);
  const int self = static_cast<int>(t.node_count());
  return emit(t, std::move(out), rg, [ids = std::move(ids), self](Tape& tp) {
    const Matrix& dout = tp.grad(self);
    int r0 = 0;
    for (int pid : ids) {
      const int h = tp.value(pid).rows;
      if (tp.requires_grad(pid)) {
        Matrix& dp = tp.grad(pid);
        for (int i = 0; i < h; ++i) {
          const double* dr = dout.row_ptr(r0 + i);
          double* dst = dp.row_ptr(i);
          for (int j = 0; j < dout.cols; ++j) dst[j] += dr[j];
        }
      }
      r0 += h;
    }
  });
}

Var slice_cols(Var a, int c0, int c1) {
  Tape& t = *a.tape;
  Matrix out = corelink::slice_cols(a.value(), c0, c1);
  const bool rg = t.requires_grad(a.id);
  const int aid = a.id, self = static_cast<int>(t.node_count());
  return emit(t, std::move(out), rg, [aid, c0, c1, self](Tape& tp) {
    const Matrix& dout = tp.grad(self);
    Matrix& da = tp.grad(aid);
    for (int i = 0; i < dout.rows; ++i) {
      const double* dr = dout.row_ptr(i);
      double* dst = da.row_ptr(i) + c0;
      for (int j = 0; j < c1 - c0; ++j) dst[j] += dr[j];
    }
  });
}

Var sum_all(Var a) {
  Tape& t = *a.tape;
  double s = 0.0;
  for (double v : a.value().data) s += v;
  Matrix out(1, 1, {s});
  const bool rg = t.requires_grad(a.id);
  const int aid = a.id, self = static_cast<int>(t.node_count());
  return emit(t, std::move(out), rg, [aid, self](Tape& tp) {
    const double g = tp.grad(self)(0, 0);
    Matrix& da = tp.grad(aid);
    for (std::size_t i = 0; i < da.data.size(); ++i) da.data[i] += g;
  });
}

namespace {

double logsumexp(const std::vector<double>& xs) {
  double mx = xs[0];
  for (double x : xs) mx = std::max(mx, x);
  double s = 0.0;
  for (double x : xs) s += std::exp(x - mx);
  return mx + std::log(s);
}

}  // namespace

Var coref_nll(std::optional<Var> mention_scores, Var pair_scores,
              const std::vector<std::vector<int>>& gold_antecedents, int k) {
  Tape& t = *pair_scores.tape;
  assert(pair_scores.value().cols == 1 &&
         pair_scores.value().rows == k * (k - 1) / 2);
  assert(static_cast<int>(gold_antecedents.size()) == k);
  const bool use_sm = mention_scores.has_value();
  if (use_sm) assert(mention_scores->value().rows == k);

  const Matrix& sa = pair_scores.value();
  const Matrix* sm = use_sm ? &mention_scores->value() : nullptr;

  auto score = [&](int i, int j) {
    double s = sa(pair_index(i, j), 0);
    if (sm) s += (*sm)(i, 0) + (*sm)(j, 0);
    return s;
  };

  double loss = 0.0;
  for (int i = 0; i < k; ++i) {
    std::vector<double> all;
    all.reserve(i + 1);
    all.push_back(0.0);  // epsilon
    for (int j = 0; j < i; ++j) all.push_back(score(i, j));
    std::vector<double> gold;
    if (gold_antecedents[i].empty()) {
      gold.push_back(0.0);
    } else {
      for (int j : gold_antecedents[i]) {
        assert(j >= 0 && j < i);
        gold.push_back(score(i, j));
      }
    }
    loss += logsumexp(all) - logsumexp(gold);
  }

  const bool rg = t.requires_grad(pair_scores.id) ||
                  (use_sm && t.requires_grad(mention_scores->id));
  const int said = pair_scores.id;
  const int smid = use_sm ? mention_scores->id : -1;
  const int self = static_cast<int>(t.node_count());
  auto gold_copy = gold_antecedents;
  return emit(t, Matrix(1, 1, {loss}), rg,
              [said, smid, k, self, gold = std::move(gold_copy)](Tape& tp) {
    const double g = tp.grad(self)(0, 0);
    const Matrix& sa = tp.value(said);
    const Matrix* sm = smid >= 0 ? &tp.value(smid) : nullptr;
    Matrix* dsa = tp.requires_grad(said) ? &tp.grad(said) : nullptr;
    Matrix* dsm = (smid >= 0 && tp.requires_grad(smid)) ? &tp.grad(smid) : nullptr;

    auto score = [&](int i, int j) {
      double s = sa(pair_index(i, j), 0);
      if (sm) s += (*sm)(i, 0) + (*sm)(j, 0);
      return s;
    };

    for (int i = 0; i < k; ++i) {
      // Softmax over [epsilon, 0..i-1] and over the gold subset.
      std::vector<double> s_all(i + 1);
      s_all[0] = 0.0;
      for (int j = 0; j < i; ++j) s_all[j + 1] = score(i, j);
      double mx = s_all[0];
      for (double v : s_all) mx = std::max(mx, v);
      double z = 0.0;
      for (double v : s_all) z += std::exp(v - mx);

      std::vector<char> is_gold(i, 0);
      double zg = 0.0;
      bool gold_is_epsilon = gold[i].empty();
      if (gold_is_epsilon) {
        zg = std::exp(0.0 - mx);
      } else {
        for (int j : gold[i]) {
          is_gold[j] = 1;
          zg += std::exp(s_all[j + 1] - mx);
        }
      }

      for (int j = 0; j < i; ++j) {
        const double p_all = std::exp(s_all[j + 1] - mx) / z;
        const double p_gold = is_gold[j] ? std::exp(s_all[j + 1] - mx) / zg : 0.0;
        const double d = g * (p_all - p_gold);
        if (d == 0.0) continue;
        if (dsa) (*dsa)(pair_index(i, j), 0) += d;
        if (dsm) {
          (*dsm)(i, 0) += d;
          (*dsm)(j, 0) += d;
        }
      }
    }
  });
}

Var softmax_xent(Var logits, const std::vector<int>& targets) {
  Tape& t = *logits.tape;
  const Matrix& x = logits.value();
  assert(static_cast<int>(targets.size()) == x.rows);
  double loss = 0.0;
  for (int i = 0; i < x.rows; ++i) {
    const double* xr = x.row_ptr(i);
    double mx = xr[0];
    for (int j = 1; j < x.cols; ++j) mx = std::max(mx, xr[j]);
    double z = 0.0;
    for (int j = 0; j < x.cols; ++j) z += std::exp(xr[j] - mx);
    assert(targets[i] >= 0 && targets[i] < x.cols);
    loss += mx + std::log(z) - xr[targets[i]];
  }
  const bool rg = t.requires_grad(logits.id);
  const int lid = logits.id, self = static_cast<int>(t.node_count());
  return emit(t, Matrix(1, 1, {loss}), rg,
              [lid, self, targets](Tape& tp) {
    const double g = tp.grad(self)(0, 0);
    const Matrix& x = tp.value(lid);
    Matrix& dx = tp.grad(lid);
    for (int i = 0; i < x.rows; ++i) {
      const double* xr = x.row_ptr(i);
      double mx = xr[0];
      for (int j = 1; j < x.cols; ++j) mx = std::max(mx, xr[j]);
      double z = 0.0;
      for (int j = 0; j < x.cols; ++j) z += std::exp(xr[j] - mx);
      double* dxr = dx.row_ptr(i);
      for (int j = 0; j < x.cols; ++j) {
        double p = std::exp(xr[j] - mx) / z;
        dxr[j] += g * (p - (j == targets[i] ? 1.0 : 0.0));
      }
    }
  });
}

}  // namespace corelink::ad
