#include "certiq/anneal.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "certiq/error.hpp"
#include "certiq/random.hpp"
#include "certiq/solve.hpp"

namespace certiq {

void AnnealConfig::validate() const {
  if (sweeps < 1 || restarts < 1) throw Error("annealing needs at least one sweep and one restart");
  const bool automatic = t_initial <= 0.0 && t_final <= 0.0;
  if (!automatic && !(t_initial > t_final && t_final > 0.0)) {
    throw Error("temperatures must satisfy t_initial > t_final > 0");
  }
}

double flip_delta(const QuboModel& model, const Bits& bits, int i) {
  double field = 0.0;
  for (int j = 0; j < model.dim(); ++j) {
    if (j != i && bits[j]) field += model.Q(i, j) + model.Q(j, i);
  }
  const double gain = model.Q(i, i) + model.q[i] + field;
  return bits[i] ? -gain : gain;
}

namespace {

// Local fields f_i = sum_j (Q_ij + Q_ji) x_j for j != i, kept in sync with x.
class FlipState {
 public:
  FlipState(const QuboModel& m, Bits x) : m_(m), S_(m.Q + m.Q.transpose()), x_(std::move(x)) {
    field_ = Vector::Zero(m.dim());
    for (int j = 0; j < m.dim(); ++j) {
      if (x_[j]) field_ += S_.col(j);
    }
    for (int i = 0; i < m.dim(); ++i) {
      if (x_[i]) field_[i] -= S_(i, i);
    }
    energy_ = certiq::energy(m, x_);
  }

  double delta(int i) const {
    const double gain = m_.Q(i, i) + m_.q[i] + field_[i];
    return x_[i] ? -gain : gain;
  }

  void flip(int i) {
    energy_ += delta(i);
    const double s = x_[i] ? -1.0 : 1.0;
    x_[i] ^= 1;
    field_ += s * S_.col(i);
    field_[i] -= s * S_(i, i);
  }

  double energy() const { return energy_; }
  const Bits& bits() const { return x_; }

 private:
  const QuboModel& m_;
  Matrix S_;
  Bits x_;
  Vector field_;
  double energy_ = 0.0;
};

}  // namespace

AnnealResult solve_exhaustive(const QuboModel& model) {
  const int n = model.dim();
  if (n > kExhaustiveCap) {
    throw Error("exhaustive search is capped at " + std::to_string(kExhaustiveCap) + " bits (got " +
                std::to_string(n) + ")");
  }
  FlipState st(model, Bits(n, 0));
  AnnealResult best;
  best.bits = st.bits();
  best.energy = st.energy();
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t g = 1; g < total; ++g) {
    // Gray code: flip the lowest set bit of the counter
    st.flip(std::countr_zero(g));
    if (st.energy() < best.energy) {
      best.energy = st.energy();
      best.bits = st.bits();
    }
  }
  // recompute to drop accumulated rounding
  best.energy = energy(model, best.bits);
  best.history.push_back(best.energy);
  return best;
}

AnnealResult solve_sa(const QuboModel& model, const AnnealConfig& cfg) {
  cfg.validate();
  const int n = model.dim();
  Deadline deadline(cfg.budget_ms);
  AnnealResult best;
  if (n == 0) {
    best.bits = {};
    best.energy = model.constant;
    return best;
  }
  for (int restart = 0; restart < cfg.restarts; ++restart) {
    Rng rng(cfg.seed + static_cast<std::uint64_t>(restart));
    Bits start(n);
    for (auto& b : start) b = rng.coin() ? 1 : 0;
    FlipState st(model, std::move(start));

    double t0 = cfg.t_initial, t1 = cfg.t_final;
    if (t0 <= 0.0) {
      double m = 0.0;
      for (int i = 0; i < n; ++i) m = std::max(m, std::abs(st.delta(i)));
      t0 = m > 0.0 ? m : 1.0;
      t1 = 1e-3 * t0;
    }
    const double cool = cfg.sweeps > 1 ? std::pow(t1 / t0, 1.0 / (cfg.sweeps - 1)) : 1.0;
    Bits run_best = st.bits();
    double run_best_e = st.energy();
    double t = t0;
    for (int sweep = 0; sweep < cfg.sweeps; ++sweep) {
      for (int i = 0; i < n; ++i) {
        const double d = st.delta(i);
        if (d <= 0.0 || rng.uniform() < std::exp(-d / t)) {
          st.flip(i);
          if (st.energy() < run_best_e) {
            run_best_e = st.energy();
            run_best = st.bits();
          }
        }
      }
      ++best.sweeps_done;
      t *= cool;
      if ((sweep & 15) == 0 && deadline.expired()) {
        best.budget_exhausted = true;
        break;
      }
    }
    run_best_e = energy(model, run_best);
    best.history.push_back(run_best_e);
    if (best.best_restart < 0 || run_best_e < best.energy) {
      best.energy = run_best_e;
      best.bits = run_best;
      best.best_restart = restart;
    }
    if (best.budget_exhausted) break;
  }
  return best;
}

}  // namespace certiq
