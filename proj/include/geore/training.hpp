#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "geore/autodiff.hpp"
#include "geore/models.hpp"
#include "geore/numerics.hpp"
#include "geore/rng.hpp"

// Loss assembly, Adam, seeding and the shared epoch loop. Training is
// single-threaded and bitwise deterministic given (seed, config, data).

namespace geore {
namespace training {

struct TrainConfig {
  std::string model = "ultrae";
  int dim = 16;
  double lr = 1e-3;
  double lr_decay = 1.0;   // multiplicative per-epoch decay
  double grad_clip = 0.0;  // elementwise gradient clamp; 0 disables
  int epochs = 100;
  int batch = 128;
  int negatives = 10;
  std::uint64_t seed = 42;
  double smoothing = 0.0;   // label smoothing on BCE targets
  double lambda1 = 0.5;     // nested-fact loss weight
  double lambda = 1.0;      // constraint penalty weight
  double temperature = 1.0;
  double eps = 0.01;
  double phi = 0.05;        // non-subsumption weight
  double margin = 2.0;      // global additive margin
  int time_dims = 2;        // q of the (p, q) signature
  char algebra = 'q';       // q | h | s
  int patience = 20;
  double val_fraction = 0.1;
  bool self_check = true;

  void validate() const {
    if (dim <= 0 || epochs < 0 || batch <= 0 || negatives < 0) throw Error("config: bad sizes");
    if (lr <= 0.0) throw Error("config: lr must be positive");
    if (lr_decay <= 0.0 || lr_decay > 1.0) throw Error("config: lr_decay must be in (0,1]");
    if (smoothing < 0.0 || smoothing >= 1.0) throw Error("config: smoothing must be in [0,1)");
    if (lambda < 0.0 || lambda1 < 0.0 || phi < 0.0) throw Error("config: negative weight");
    if (temperature <= 0.0 || eps <= 0.0) throw Error("config: temperature/eps must be positive");
  }
};

// -(1/N) * (sum log p + sum log(1 - p~)), probabilities clamped at 1e-12.
template <class S>
S bce_loss(const std::vector<S>& pos_probs, const std::vector<S>& neg_probs) {
  if (pos_probs.empty()) throw Error("bce_loss: no positive samples");
  using std::log;
  S acc(0.0);
  for (const S& p : pos_probs) acc = acc + log(vmax(S(1e-12), p));
  for (const S& p : neg_probs) acc = acc + log(vmax(S(1e-12), S(1.0) - p));
  return S(0.0) - acc / S(static_cast<double>(pos_probs.size()));
}

// Smoothed-target variant over raw scores; smoothing 0 recovers bce_loss
// over sigmoid probabilities.
template <class S>
S bce_from_scores(const std::vector<S>& pos_scores, const std::vector<S>& neg_scores,
                  double smoothing) {
  if (pos_scores.empty()) throw Error("bce_from_scores: no positive samples");
  using std::log;
  const double ts = 1.0 - smoothing;
  S acc(0.0);
  for (const S& s : pos_scores) {
    S p = sigmoid(s);
    acc = acc + S(ts) * log(vmax(S(1e-12), p));
    if (smoothing > 0.0) acc = acc + S(smoothing) * log(vmax(S(1e-12), S(1.0) - p));
  }
  for (const S& s : neg_scores) {
    S p = sigmoid(s);
    acc = acc + S(ts) * log(vmax(S(1e-12), S(1.0) - p));
    if (smoothing > 0.0) acc = acc + S(smoothing) * log(vmax(S(1e-12), p));
  }
  return S(0.0) - acc / S(static_cast<double>(pos_scores.size()));
}

struct AdamState {
  Vec m, v;
  long t = 0;
};

inline void adam_step(Vec& params, const Vec& grads, AdamState& st, double lr,
                      double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8) {
  if (params.size() != grads.size()) throw Error("adam_step: shape mismatch");
  if (st.m.empty()) {
    st.m.assign(params.size(), 0.0);
    st.v.assign(params.size(), 0.0);
  }
  if (st.m.size() != params.size()) throw Error("adam_step: state shape mismatch");
  ++st.t;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(st.t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(st.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    st.m[i] = beta1 * st.m[i] + (1.0 - beta1) * grads[i];
    st.v[i] = beta2 * st.v[i] + (1.0 - beta2) * grads[i] * grads[i];
    const double mh = st.m[i] / c1, vh = st.v[i] / c2;
    params[i] -= lr * mh / (std::sqrt(vh) + eps);
  }
}

// softplus margin losses of the nested-fact objective:
// sum g(-score) over positives + sum g(score) over negatives.
template <class S>
S softplus_rank_loss(const std::vector<S>& pos_scores, const std::vector<S>& neg_scores) {
  S acc(0.0);
  for (const S& s : pos_scores) acc = acc + softplus(S(0.0) - s);
  for (const S& s : neg_scores) acc = acc + softplus(s);
  return acc;
}

// ----- checkpoints -----

struct Checkpoint {
  std::string model;
  nlohmann::json hyper;
  std::vector<models::ParamGroup> groups;
  Vec params;
};

inline void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  nlohmann::json j;
  j["model"] = ck.model;
  j["hyperparameters"] = ck.hyper;
  nlohmann::json groups = nlohmann::json::object();
  for (const auto& g : ck.groups) {
    Vec v(ck.params.begin() + g.offset, ck.params.begin() + g.offset + g.size);
    groups[g.name] = v;
  }
  j["groups"] = groups;
  nlohmann::json order = nlohmann::json::array();
  for (const auto& g : ck.groups) order.push_back(g.name);
  j["group_order"] = order;
  std::ofstream out(path);
  if (!out) throw Error("cannot write checkpoint: " + path);
  out << j.dump(2) << '\n';
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open checkpoint: " + path);
  nlohmann::json j;
  in >> j;
  Checkpoint ck;
  ck.model = j.at("model").get<std::string>();
  ck.hyper = j.at("hyperparameters");
  std::size_t off = 0;
  for (const auto& name : j.at("group_order")) {
    Vec v = j.at("groups").at(name.get<std::string>()).get<Vec>();
    ck.groups.push_back({name.get<std::string>(), off, v.size()});
    ck.params.insert(ck.params.end(), v.begin(), v.end());
    off += v.size();
  }
  return ck;
}

// ----- generic epoch loop -----

class TrainAbort : public Error {
 public:
  TrainAbort(int epoch, int batch, const std::string& why)
      : Error("training aborted at epoch " + std::to_string(epoch) + ", batch " +
              std::to_string(batch) + ": " + why) {}
};

struct TrainResult {
  Vec params;        // parameters at the best validation loss
  Vec final_params;  // parameters after the last epoch
  Vec train_curve, val_curve;
  int best_epoch = -1;
  double best_val = std::numeric_limits<double>::infinity();
};

// A driver supplies, for one model family:
//   size_t count() const;                        number of facts
//   size_t num_params() const;
//   void init(Vec&, std::mt19937_64&) const;
//   ad::Var batch_loss(Tape&, vector<Var>& P, const vector<int>& idx, rng&) const;
//   double eval_loss(const Vec&, const vector<int>& idx, rng&) const;
//   void project(Vec&) const;                    post-update projection (may be no-op)
template <class Driver>
TrainResult train(const Driver& drv, const TrainConfig& cfg) {
  cfg.validate();
  TrainResult res;
  std::mt19937_64 rng_init = rng_stream(cfg.seed, "init");
  std::mt19937_64 rng_shuffle = rng_stream(cfg.seed, "shuffle");
  std::mt19937_64 rng_neg = rng_stream(cfg.seed, "negatives");
  std::mt19937_64 rng_eval = rng_stream(cfg.seed, "eval-negatives");

  Vec params;
  drv.init(params, rng_init);
  drv.project(params);

  std::vector<int> order(drv.count());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng_shuffle);
  const std::size_t n_val =
      std::min(drv.count() > 1 ? drv.count() - 1 : 0,
               static_cast<std::size_t>(cfg.val_fraction * static_cast<double>(drv.count())));
  std::vector<int> val_idx(order.begin(), order.begin() + n_val);
  std::vector<int> train_idx(order.begin() + n_val, order.end());
  if (train_idx.empty()) throw Error("train: no training facts");

  if (cfg.self_check) startup_gradient_check(drv, params, cfg);

  AdamState adam;
  res.params = params;
  auto eval_epoch = [&](const Vec& p) {
    std::mt19937_64 r1 = rng_stream(cfg.seed, "eval-train");
    const double tr = drv.eval_loss(p, train_idx, r1);
    double va = tr;
    if (!val_idx.empty()) {
      std::mt19937_64 r2(rng_eval);
      va = drv.eval_loss(p, val_idx, r2);
    }
    res.train_curve.push_back(tr);
    res.val_curve.push_back(va);
    return va;
  };

  {
    const double va = eval_epoch(params);
    res.best_val = va;
    res.best_epoch = 0;
  }

  int since_best = 0;
  double lr_now = cfg.lr;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(train_idx.begin(), train_idx.end(), rng_shuffle);
    for (std::size_t start = 0, bi = 0; start < train_idx.size();
         start += static_cast<std::size_t>(cfg.batch), ++bi) {
      const std::size_t stop =
          std::min(train_idx.size(), start + static_cast<std::size_t>(cfg.batch));
      std::vector<int> batch(train_idx.begin() + start, train_idx.begin() + stop);
      ad::Tape tape;
      std::vector<ad::Var> pv = tape.leaves(params);
      ad::Var loss = drv.batch_loss(tape, pv, batch, rng_neg);
      if (!std::isfinite(loss.value()))
        throw TrainAbort(epoch, static_cast<int>(bi), "non-finite loss");
      if (loss.tape() == nullptr) continue;  // batch fully satisfied: zero gradient
      Vec adj = tape.gradient(loss);
      Vec grads(params.size());
      for (std::size_t i = 0; i < params.size(); ++i) grads[i] = adj[i];
      if (cfg.grad_clip > 0.0)
        for (double& g : grads) g = std::clamp(g, -cfg.grad_clip, cfg.grad_clip);
      adam_step(params, grads, adam, lr_now);
      drv.project(params);
    }
    lr_now *= cfg.lr_decay;
    const double va = eval_epoch(params);
    if (!std::isfinite(va)) throw TrainAbort(epoch, -1, "non-finite epoch loss");
    if (va < res.best_val - 1e-12) {
      res.best_val = va;
      res.best_epoch = epoch;
      res.params = params;
      since_best = 0;
    } else if (++since_best > cfg.patience && cfg.patience > 0) {
      break;
    }
  }
  res.final_params = params;
  if (res.best_epoch < 0) res.params = params;
  return res;
}

// Startup self-test: the analytic batch gradient against the central
// difference oracle at random parameter points. Points that land on a
// non-smooth kink are resampled; for large models the finite differences
// probe the highest-magnitude coordinates plus a random sample.
template <class Driver>
void startup_gradient_check(const Driver& drv, const Vec& params0, const TrainConfig& cfg,
                            int points = 20, double tol = 1e-4) {
  std::mt19937_64 rng = rng_stream(cfg.seed, "selfcheck");
  std::vector<int> batch;
  for (std::size_t i = 0; i < std::min<std::size_t>(4, drv.count()); ++i)
    batch.push_back(static_cast<int>(i));
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  for (int pt = 0; pt < points; ++pt) {
    Vec params = params0;
    for (double& p : params) p += jitter(rng);
    drv.project(params);

    const std::uint64_t neg_state = rng();
    auto loss_at = [&](const Vec& p) {
      std::mt19937_64 r(neg_state);
      return drv.eval_loss(p, batch, r);
    };

    ad::Tape tape;
    std::vector<ad::Var> pv = tape.leaves(params);
    std::mt19937_64 r(neg_state);
    ad::Var loss = drv.batch_loss(tape, pv, batch, r);
    if (loss.tape() == nullptr) continue;  // constant loss: nothing to check
    Vec adj = tape.gradient(loss);

    std::vector<std::size_t> coords;
    if (params.size() <= 800) {
      coords.resize(params.size());
      std::iota(coords.begin(), coords.end(), std::size_t{0});
    } else {
      std::vector<std::size_t> by_mag(params.size());
      std::iota(by_mag.begin(), by_mag.end(), std::size_t{0});
      std::partial_sort(by_mag.begin(), by_mag.begin() + 200, by_mag.end(),
                        [&](std::size_t a, std::size_t b) {
                          return std::fabs(adj[a]) > std::fabs(adj[b]);
                        });
      coords.assign(by_mag.begin(), by_mag.begin() + 200);
      std::uniform_int_distribution<std::size_t> pick(0, params.size() - 1);
      for (int k = 0; k < 50; ++k) coords.push_back(pick(rng));
    }

    auto central_diff = [&](std::size_t i, double hi) {
      Vec p = params;
      p[i] += hi;
      const double fp = loss_at(p);
      p[i] = params[i] - hi;
      const double fm = loss_at(p);
      return (fp - fm) / (2.0 * hi);
    };

    double worst = 0.0;
    std::size_t worst_i = 0;
    for (std::size_t i : coords) {
      const double hi = 1e-5 * std::max(1.0, std::fabs(params[i]));
      const double fd = central_diff(i, hi);
      const double rel = std::fabs(adj[i] - fd) / std::max({1.0, std::fabs(adj[i]), std::fabs(fd)});
      if (rel <= tol) continue;
      // Distinguish an honest mismatch from a max/abs kink: at a kink the
      // central difference itself does not converge as the step shrinks.
      const double fd2 = central_diff(i, hi / 8.0);
      const double drift = std::fabs(fd - fd2) / std::max({1.0, std::fabs(fd), std::fabs(fd2)});
      if (drift > tol) continue;  // non-smooth point, rejected
      if (rel > worst) {
        worst = rel;
        worst_i = i;
      }
    }
    if (worst > tol)
      throw Error("startup gradient check failed: rel err " + std::to_string(worst) +
                  " at coordinate " + std::to_string(worst_i));
  }
}

inline void write_loss_curve(const std::string& path, const Vec& train, const Vec& val) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write loss curve: " + path);
  out << "epoch,loss,val_loss\n";
  char buf[96];
  for (std::size_t e = 0; e < train.size(); ++e) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", e, train[e], val[e]);
    out << buf;
  }
}

}  // namespace training
}  // namespace geore
