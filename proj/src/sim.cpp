#include "vadelay/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vadelay/errors.hpp"
#include "vadelay/mathutil.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vadelay {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// FIFO buffer of arrival timestamps; power-of-two ring.
class Ring {
 public:
  void push(double v) {
    if (size_ == buf_.size()) grow();
    buf_[(head_ + size_) & mask_] = v;
    ++size_;
  }
  double pop() {
    double v = buf_[head_];
    head_ = (head_ + 1) & mask_;
    --size_;
    return v;
  }
  bool empty() const { return size_ == 0; }
  size_t size() const { return size_; }

 private:
  void grow() {
    size_t cap = buf_.empty() ? 16 : buf_.size() * 2;
    std::vector<double> nb(cap);
    for (size_t i = 0; i < size_; ++i) nb[i] = buf_[(head_ + i) & mask_];
    buf_ = std::move(nb);
    head_ = 0;
    mask_ = cap - 1;
  }
  std::vector<double> buf_;
  size_t head_ = 0, size_ = 0, mask_ = 0;
};

struct FlatModel {
  int n = 0, m = 0;  // flows, groups
  std::vector<int> group_of;
  std::vector<std::vector<int>> members;
  std::vector<FittedDist> headway;
  std::vector<FittedDist> interarrival;
  std::vector<double> lambda;
  std::vector<FittedDist> all_red;
  double scale = 1.0;  // 1 - L*rho, for the scaled-delay histogram
};

struct RepAccum {
  std::vector<double> delay_sum;
  std::vector<long long> delay_n;
  std::vector<long long> arrivals, departures, passes, final_q;
  std::vector<long long> ended_by;
  std::vector<long long> greens_total, greens_zero, greens_nonempty;
  std::vector<double> green_len;
  long long cycles_measured = 0;
  double measure_start = 0.0, measure_end = 0.0;
  double sim_time = 0.0;
  std::vector<std::vector<long long>> hist;
  std::vector<long long> hist_zeros, hist_total;

  explicit RepAccum(const FlatModel& fm, const SimConfig& cfg)
      : delay_sum(fm.n), delay_n(fm.n), arrivals(fm.n), departures(fm.n),
        passes(fm.n), final_q(fm.n), ended_by(fm.n), greens_total(fm.m),
        greens_zero(fm.m), greens_nonempty(fm.m), green_len(fm.m) {
    if (cfg.collect_cdf) {
      hist.assign(fm.n, std::vector<long long>(cfg.cdf_bins, 0));
      hist_zeros.assign(fm.n, 0);
      hist_total.assign(fm.n, 0);
    }
  }
  RepAccum() = default;
};

class Replication {
 public:
  Replication(const FlatModel& fm, const SimConfig& cfg, int rep)
      : fm_(fm), cfg_(cfg), acc_(fm, cfg) {
    std::uint64_t base =
        static_cast<std::uint64_t>(rep) * (2ULL * fm.n + fm.m);
    for (int i = 0; i < fm_.n; ++i) {
      arr_s_.emplace_back(cfg.root_seed, base + 2 * i);
      hw_s_.emplace_back(cfg.root_seed, base + 2 * i + 1);
    }
    for (int g = 0; g < fm_.m; ++g)
      red_s_.emplace_back(cfg.root_seed, base + 2ULL * fm_.n + g);
    warmup_ = cfg.warmup >= 0 ? cfg.warmup
                              : std::max<long>(200, cfg.cycles / 10);
    target_ = cfg.horizon > 0.0
                  ? std::numeric_limits<long long>::max()
                  : static_cast<long long>(warmup_) + cfg.cycles;
    min_n_ = cfg.min_samples_per_flow > 0
                 ? (cfg.min_samples_per_flow + cfg.replications - 1) /
                       cfg.replications
                 : 0;
  }

  RepAccum run() {
    q_.resize(fm_.n);
    serving_.assign(fm_.n, false);
    completion_.assign(fm_.n, kInf);
    next_arr_.resize(fm_.n);
    for (int i = 0; i < fm_.n; ++i)
      next_arr_[i] = fm_.lambda[i] > 0.0
                         ? arr_s_[i].sample(fm_.interarrival[i])
                         : kInf;
    bool running = advance_phase();
    while (running) {
      int ai = -1;
      double at = kInf;
      for (int i = 0; i < fm_.n; ++i)
        if (next_arr_[i] < at) {
          at = next_arr_[i];
          ai = i;
        }
      int di = -1;
      double dt = kInf;
      if (in_green_)
        for (int f : fm_.members[ag_])
          if (completion_[f] < dt) {
            dt = completion_[f];
            di = f;
          }
      double pt = in_green_ ? kInf : red_end_;
      double tn = std::min(at, std::min(dt, pt));
      if (tn == kInf) break;  // nothing pending (all arrival rates zero)
      if (cfg_.horizon > 0.0 && tn >= cfg_.horizon) {
        t_ = cfg_.horizon;
        break;
      }
      t_ = tn;
      if (at <= tn) {
        process_arrival(ai);
      } else if (di >= 0 && dt <= tn) {
        running = process_departure(di);
      } else {
        running = advance_phase();
      }
    }
    for (int i = 0; i < fm_.n; ++i)
      acc_.final_q[i] = static_cast<long long>(q_[i].size());
    acc_.sim_time = t_;
    return std::move(acc_);
  }

 private:
  bool measuring() const { return cycle_ >= warmup_; }

  void record_sample(int i, double d) {
    if (!measuring()) return;
    acc_.delay_sum[i] += d;
    acc_.delay_n[i]++;
    if (!acc_.hist.empty()) {
      acc_.hist_total[i]++;
      if (d == 0.0) {
        acc_.hist_zeros[i]++;
      } else {
        double scaled = d * fm_.scale;
        int b = static_cast<int>(scaled / cfg_.cdf_xmax * cfg_.cdf_bins);
        b = std::clamp(b, 0, cfg_.cdf_bins - 1);
        acc_.hist[i][b]++;
      }
    }
  }

  void process_arrival(int i) {
    acc_.arrivals[i]++;
    next_arr_[i] = t_ + arr_s_[i].sample(fm_.interarrival[i]);
    if (in_green_ && fm_.group_of[i] == ag_ && !serving_[i] && q_[i].empty()) {
      if (cfg_.stay_empty) {
        // the flow already cleared during this green: pass straight through
        record_sample(i, 0.0);
        acc_.passes[i]++;
        return;
      }
      q_[i].push(t_);
      serving_[i] = true;
      completion_[i] = t_ + hw_s_[i].sample(fm_.headway[i]);
      return;
    }
    q_[i].push(t_);
  }

  bool process_departure(int i) {
    record_sample(i, t_ - q_[i].pop());
    acc_.departures[i]++;
    if (!q_[i].empty()) {
      completion_[i] = t_ + hw_s_[i].sample(fm_.headway[i]);
      return true;
    }
    serving_[i] = false;
    completion_[i] = kInf;
    for (int f : fm_.members[ag_])
      if (serving_[f] || !q_[f].empty()) return true;
    // exhaustive green ends with this, the last departure
    if (green_measured_) {
      acc_.green_len[ag_] += t_ - green_start_;
      acc_.greens_nonempty[ag_]++;
      acc_.ended_by[i]++;
    }
    in_green_ = false;
    double rl = red_s_[ag_].sample(fm_.all_red[ag_]);
    if (rl > 0.0) {
      red_end_ = t_ + rl;
      return true;
    }
    return advance_phase();
  }

  // Move to the next green; record zero-length greens along the way. Returns
  // false when the replication is done.
  bool advance_phase() {
    int silent = 0;
    while (true) {
      ag_ = (ag_ + 1) % fm_.m;
      if (ag_ == 0 && !on_cycle_boundary()) return false;
      bool any = false;
      for (int f : fm_.members[ag_])
        if (!q_[f].empty()) {
          any = true;
          break;
        }
      if (any) {
        in_green_ = true;
        green_start_ = t_;
        green_measured_ = measuring();
        if (green_measured_) acc_.greens_total[ag_]++;
        for (int f : fm_.members[ag_]) {
          if (!q_[f].empty()) {
            serving_[f] = true;
            completion_[f] = t_ + hw_s_[f].sample(fm_.headway[f]);
          }
        }
        return true;
      }
      if (measuring()) {
        acc_.greens_total[ag_]++;
        acc_.greens_zero[ag_]++;
      }
      double rl = red_s_[ag_].sample(fm_.all_red[ag_]);
      if (rl > 0.0) {
        red_end_ = t_ + rl;
        in_green_ = false;
        return true;
      }
      if (++silent >= fm_.m) {
        // a full lap: nothing to serve, no red to sit in -> idle until the
        // next arrival (single-group zero-red configurations)
        int ai = -1;
        double at = kInf;
        for (int i = 0; i < fm_.n; ++i)
          if (next_arr_[i] < at) {
            at = next_arr_[i];
            ai = i;
          }
        if (ai < 0) return false;
        if (cfg_.horizon > 0.0 && at >= cfg_.horizon) {
          t_ = cfg_.horizon;
          return false;
        }
        t_ = at;
        acc_.arrivals[ai]++;
        next_arr_[ai] = t_ + arr_s_[ai].sample(fm_.interarrival[ai]);
        q_[ai].push(t_);
        silent = 0;
      }
    }
  }

  // Returns false (stop) when the measured-cycle budget is exhausted.
  bool on_cycle_boundary() {
    ++cycle_;
    if (cycle_ == warmup_) acc_.measure_start = t_;
    if (cycle_ > warmup_) {
      acc_.measure_end = t_;
      acc_.cycles_measured = cycle_ - warmup_;
    }
    if (cycle_ >= target_ && samples_ok()) return false;
    return true;
  }

  bool samples_ok() const {
    if (min_n_ == 0) return true;
    for (int i = 0; i < fm_.n; ++i)
      if (fm_.lambda[i] > 0.0 && acc_.delay_n[i] < min_n_) return false;
    return true;
  }

  const FlatModel& fm_;
  const SimConfig& cfg_;
  RepAccum acc_;
  std::vector<RandomStream> arr_s_, hw_s_, red_s_;
  long warmup_ = 0;
  long long target_ = 0, min_n_ = 0;

  double t_ = 0.0;
  int ag_ = -1;
  bool in_green_ = false;
  bool green_measured_ = false;
  double green_start_ = 0.0, red_end_ = kInf;
  long long cycle_ = -1;
  std::vector<Ring> q_;
  std::vector<char> serving_;
  std::vector<double> completion_, next_arr_;
};

FlatModel flatten(const LoadedScenario& sc) {
  FlatModel fm;
  fm.m = sc.dq.spec.num_groups();
  fm.members.resize(fm.m);
  for (int g = 0; g < fm.m; ++g) {
    const auto& grp = sc.dq.spec.groups[g];
    fm.all_red.push_back(grp.all_red);
    for (size_t j = 0; j < grp.flows.size(); ++j) {
      int idx = fm.n++;
      fm.members[g].push_back(idx);
      fm.group_of.push_back(g);
      fm.headway.push_back(grp.flows[j].headway);
      fm.interarrival.push_back(sc.loads[g][j].interarrival);
      fm.lambda.push_back(sc.loads[g][j].lambda);
    }
  }
  fm.scale = 1.0 - sc.system_load();
  return fm;
}

}  // namespace

SimResult simulate(const LoadedScenario& sc, const SimConfig& cfg) {
  if (cfg.replications < 1)
    throw ValidationError("at least one replication required");
  if (cfg.cycles < 1 && !(cfg.horizon > 0.0))
    throw ValidationError("need a positive cycle count or a horizon");
  if (cfg.collect_cdf && (!(cfg.cdf_xmax > 0.0) || cfg.cdf_bins < 2))
    throw ValidationError("histogram collection needs cdf_xmax > 0 and bins");
  double total_red = 0.0;
  for (const auto& g : sc.dq.spec.groups) total_red += g.all_red_mean;
  if (total_red == 0.0 && cfg.stay_empty)
    throw ValidationError(
        "stay-empty control without any all-red time never serves a "
        "re-formed queue; use refill mode");
  if (sc.system_load() >= 1.0) {
    if (!cfg.allow_unstable)
      throw InstabilityError("unstable load: L*rho = " +
                             std::to_string(sc.system_load()));
    if (!(cfg.horizon > 0.0))
      throw ValidationError("unstable runs need a finite horizon");
  }

  FlatModel fm = flatten(sc);
  const int reps = cfg.replications;
  std::vector<RepAccum> acc(reps);
  auto work = [&](int r) { acc[r] = Replication(fm, cfg, r).run(); };
#ifdef _OPENMP
  if (cfg.threads > 1) {
#pragma omp parallel for schedule(dynamic) num_threads(cfg.threads)
    for (int r = 0; r < reps; ++r) work(r);
  } else {
    for (int r = 0; r < reps; ++r) work(r);
  }
#else
  for (int r = 0; r < reps; ++r) work(r);
#endif

  SimResult res;
  res.rho = sc.rho;
  res.system_load = sc.system_load();
  res.flows.resize(fm.m);
  res.groups.resize(fm.m);
  res.conservation_ok = true;

  double cycle_time = 0.0;
  long long cycle_count = 0;
  double sim_time = 0.0;
  for (int r = 0; r < reps; ++r) {
    cycle_time += acc[r].measure_end - acc[r].measure_start;
    cycle_count += acc[r].cycles_measured;
    sim_time += acc[r].sim_time;
  }
  res.mean_cycle = cycle_count > 0 ? cycle_time / cycle_count : 0.0;
  res.sim_time_per_rep = sim_time / reps;

  int idx = 0;
  for (int g = 0; g < fm.m; ++g) {
    long long greens = 0, zeros = 0;
    double len = 0.0;
    for (int r = 0; r < reps; ++r) {
      greens += acc[r].greens_total[g];
      zeros += acc[r].greens_zero[g];
      len += acc[r].green_len[g];
    }
    res.groups[g].mean_green = greens > 0 ? len / greens : 0.0;
    res.groups[g].zero_green_share =
        greens > 0 ? static_cast<double>(zeros) / greens : 0.0;

    for (size_t j = 0; j < sc.dq.spec.groups[g].flows.size(); ++j, ++idx) {
      FlowStats fs;
      double p_sum = 0.0;
      int p_reps = 0;
      for (int r = 0; r < reps; ++r) {
        const RepAccum& a = acc[r];
        fs.samples += a.delay_n[idx];
        if (a.delay_n[idx] > 0)
          fs.rep_means.push_back(a.delay_sum[idx] / a.delay_n[idx]);
        if (a.greens_nonempty[g] > 0) {
          p_sum += static_cast<double>(a.ended_by[idx]) / a.greens_nonempty[g];
          ++p_reps;
        }
        fs.final_queue_mean += a.final_q[idx];
        res.arrivals += a.arrivals[idx];
        res.departures += a.departures[idx];
        res.pass_throughs += a.passes[idx];
        res.left_in_queue += a.final_q[idx];
        if (a.arrivals[idx] !=
            a.departures[idx] + a.passes[idx] + a.final_q[idx])
          res.conservation_ok = false;
        if (!acc[r].hist.empty()) {
          if (fs.cdf_counts.empty()) fs.cdf_counts.assign(cfg.cdf_bins, 0);
          for (int b = 0; b < cfg.cdf_bins; ++b)
            fs.cdf_counts[b] += a.hist[idx][b];
          fs.cdf_zeros += a.hist_zeros[idx];
          fs.cdf_total += a.hist_total[idx];
        }
      }
      fs.final_queue_mean /= reps;
      fs.p_last_departure =
          p_reps > 0 ? p_sum / p_reps : std::nan("");
      if (!fs.rep_means.empty()) {
        double s = 0.0;
        for (double v : fs.rep_means) s += v;
        fs.mean_delay = s / fs.rep_means.size();
        if (fs.rep_means.size() > 1) {
          double var = 0.0;
          for (double v : fs.rep_means) {
            double d = v - fs.mean_delay;
            var += d * d;
          }
          var /= (fs.rep_means.size() - 1);
          fs.ci_half_width =
              t_quantile_975(static_cast<int>(fs.rep_means.size()) - 1) *
              std::sqrt(var / fs.rep_means.size());
        } else {
          fs.ci_half_width = std::nan("");
        }
      } else {
        fs.mean_delay = std::nan("");
        fs.ci_half_width = std::nan("");
      }
      res.flows[g].push_back(std::move(fs));
    }
  }
  return res;
}

}  // namespace vadelay
