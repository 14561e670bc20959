#include "brute_stats.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace cyclebench::testing {

namespace {

using Opt = std::optional<double>;

int Sign(double i, double eps) { return i > eps ? 1 : (i < -eps ? -1 : 0); }

Opt Avg(std::vector<double> const& xs) {
  if (xs.empty()) return std::nullopt;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

// Sample statistics, two-pass.
void Spread(std::vector<double> const& xs, Row& out, std::string const& base) {
  auto put = [&](char const* suffix, Opt v) { out[base + suffix] = v; };
  if (xs.empty()) {
    for (auto s : {"Average", "First", "Last", "Max", "Min", "StdDev", "StdError", "Variance"}) put(s, std::nullopt);
    return;
  }
  double const n = static_cast<double>(xs.size());
  double mean = *Avg(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  double var = xs.size() > 1 ? ss / (n - 1.0) : 0.0;
  put("Average", mean);
  put("First", xs.front());
  put("Last", xs.back());
  put("Max", *std::max_element(xs.begin(), xs.end()));
  put("Min", *std::min_element(xs.begin(), xs.end()));
  put("Variance", var);
  put("StdDev", std::sqrt(var));
  put("StdError", std::sqrt(var) / std::sqrt(n));
}

}  // namespace

std::vector<BruteCycle> BruteForceStats(CanonicalDataset const& raw) {
  auto const& P = raw.points;
  std::size_t const n = P.size();
  double imax = 0.0;
  for (auto const& p : P) imax = std::max(imax, std::fabs(p.current));
  double const eps = std::max(1e-6, 1e-4 * imax);
  std::vector<int> sg(n);
  for (std::size_t k = 0; k < n; ++k) sg[k] = Sign(P[k].current, eps);

  // Cycle label per sample.
  bool source_labels = std::all_of(P.begin(), P.end(), [](DataPoint const& p) { return p.cycle_index.has_value(); });
  std::vector<long> label(n);
  if (source_labels) {
    for (std::size_t k = 0; k < n; ++k) label[k] = static_cast<long>(*P[k].cycle_index);
  } else {
    long c = 1;
    bool had_discharge = false;
    for (std::size_t k = 0; k < n; ++k) {
      if (sg[k] == 1 && had_discharge) {
        ++c;
        had_discharge = false;
      }
      if (sg[k] == -1) had_discharge = true;
      label[k] = c;
    }
  }

  // Integration origin: a sample restarts the running integrals when it
  // opens a cycle, or is active and its sign differs from the last active
  // sample seen since the cycle opened (or none was seen yet).
  // Source labels split integration; derived labels only split at sign
  // changes, which restart integration anyway.
  auto restarts = [&](std::size_t j) {
    if (j == 0) return true;
    if (source_labels && label[j] != label[j - 1]) return true;
    if (sg[j] == 0) return false;
    for (std::size_t i = j; i-- > 0;) {
      if (source_labels && label[i] != label[j]) return true;
      if (sg[i] != 0) return sg[i] != sg[j];
      if (i == 0) break;
    }
    // Nothing active before j: the reset at the start set half-cycle sign 0.
    return true;
  };
  auto integral = [&](std::size_t k, bool energy) {
    std::size_t o = k;
    while (!restarts(o)) --o;
    double s = 0.0;
    for (std::size_t i = o + 1; i <= k; ++i) {
      double dt = P[i].time - P[i - 1].time;
      double a = energy ? std::fabs(P[i - 1].current * P[i - 1].voltage) : std::fabs(P[i - 1].current);
      double b = energy ? std::fabs(P[i].current * P[i].voltage) : std::fabs(P[i].current);
      s += 0.5 * (a + b) * dt / 3600.0;
    }
    return s;
  };

  struct Span {
    std::size_t a, b;
  };
  std::vector<BruteCycle> out;
  std::vector<Row> per_cycle;
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = start;
    while (end + 1 < n && label[end + 1] == label[start]) ++end;

    std::optional<std::size_t> fc, fd;
    for (std::size_t k = start; k <= end; ++k) {
      if (sg[k] == 1 && !fc) fc = k;
      if (sg[k] == -1 && !fd) fd = k;
    }
    std::optional<Span> cs, ds;
    if (fc && fd) {
      if (*fc < *fd) {
        cs = Span{*fc, *fd - 1};
        ds = Span{*fd, end};
      } else {
        ds = Span{*fd, *fc - 1};
        cs = Span{*fc, end};
      }
    } else if (fc) {
      cs = Span{*fc, end};
    } else if (fd) {
      ds = Span{*fd, end};
    }

    Row r;
    r["Index"] = static_cast<double>(label[start]);
    r["FirstPointIndex"] = static_cast<double>(P[start].index);
    r["PointCount"] = static_cast<double>(end - start + 1);

    std::vector<double> w_all, w_active, volts, temps;
    for (std::size_t k = start; k <= end; ++k) {
      double w = P[k].voltage * P[k].current;
      w_all.push_back(w);
      if (sg[k] != 0) w_active.push_back(w);
      volts.push_back(P[k].voltage);
      if (P[k].temperature) temps.push_back(*P[k].temperature);
    }
    r["Power"] = Avg(w_all);
    r["AveragePower"] = Avg(w_active);
    r["MinimumPower"] = *std::min_element(w_all.begin(), w_all.end());
    r["MaximumPower"] = *std::max_element(w_all.begin(), w_all.end());
    r["Temperature"] = Avg(temps);
    r["~Voltage"] = Avg(volts);
    r["EndRestVoltage"] = sg[end] == 0 ? Opt(P[end].voltage) : std::nullopt;

    auto step_resistance = [&](Span s, int want) -> Opt {
      for (std::size_t k = std::max<std::size_t>(s.a, 1); k <= s.b; ++k) {
        if (sg[k - 1] != 0 || sg[k] != want) continue;
        double di = P[k].current - P[k - 1].current;
        if (std::fabs(di) <= 10.0 * eps) continue;
        return (P[k].voltage - P[k - 1].voltage) / di;
      }
      return std::nullopt;
    };

    double qc = 0.0, ec = 0.0, qd = 0.0, ed = 0.0;
    for (auto key : {"StartChargeVoltage", "StartCurrent", "EndVoltage", "EndCurrent", "ResistanceOhms",
                     "StartDischargeVoltage", "StartDischargeCurrent", "DischargeEndVoltage",
                     "DischargeEndCurrent", "DischargeResistance", "DischargePower", "AverageDischargePower",
                     "MinimumDischargePower", "MaximumDischargePower", "MidVoltage", "~ChargeVoltage",
                     "~DischargeVoltage"}) {
      r[key] = std::nullopt;
    }
    if (cs) {
      std::vector<double> v_act;
      for (std::size_t k = cs->a; k <= cs->b; ++k) {
        qc = std::max(qc, integral(k, false));
        ec = std::max(ec, integral(k, true));
        if (sg[k] == 1) {
          v_act.push_back(P[k].voltage);
          r["EndVoltage"] = P[k].voltage;
          r["EndCurrent"] = P[k].current;
        }
      }
      r["~ChargeVoltage"] = Avg(v_act);
      r["StartChargeVoltage"] = P[cs->a].voltage;
      r["StartCurrent"] = P[cs->a].current;
      r["ResistanceOhms"] = step_resistance(*cs, 1);
    }
    if (ds) {
      std::vector<double> v_act, w_span, w_act;
      std::vector<double> q(ds->b - ds->a + 1);
      for (std::size_t k = ds->a; k <= ds->b; ++k) {
        q[k - ds->a] = integral(k, false);
        qd = std::max(qd, q[k - ds->a]);
        ed = std::max(ed, integral(k, true));
        double w = P[k].voltage * P[k].current;
        w_span.push_back(w);
        if (sg[k] == -1) {
          v_act.push_back(P[k].voltage);
          w_act.push_back(w);
          r["DischargeEndVoltage"] = P[k].voltage;
          r["DischargeEndCurrent"] = P[k].current;
        }
      }
      r["~DischargeVoltage"] = Avg(v_act);
      r["DischargePower"] = Avg(w_span);
      r["AverageDischargePower"] = Avg(w_act);
      if (!w_act.empty()) {
        r["MinimumDischargePower"] = *std::min_element(w_act.begin(), w_act.end());
        r["MaximumDischargePower"] = *std::max_element(w_act.begin(), w_act.end());
      }
      r["StartDischargeVoltage"] = P[ds->a].voltage;
      r["StartDischargeCurrent"] = P[ds->a].current;
      r["DischargeResistance"] = step_resistance(*ds, -1);
      if (qd > 0.0) {
        double half = qd / 2.0;
        for (std::size_t k = ds->a; k <= ds->b; ++k) {
          double qk = q[k - ds->a];
          if (qk < half) continue;
          if (k == ds->a) {
            r["MidVoltage"] = P[k].voltage;
          } else {
            double qp = q[k - 1 - ds->a];
            double t = qk > qp ? (half - qp) / (qk - qp) : 1.0;
            r["MidVoltage"] = P[k - 1].voltage + t * (P[k].voltage - P[k - 1].voltage);
          }
          break;
        }
      }
    }
    r["ChargeCapacity"] = qc;
    r["ChargeEnergy"] = ec;
    r["DischargeCapacity"] = qd;
    r["DischargeEnergy"] = ed;
    r["~CoulombicEfficiency"] = qc > 0.0 ? Opt(qd / qc) : std::nullopt;
    per_cycle.push_back(r);
    start = end + 1;
  }

  // Retention against the first cycle with both capacities nonzero.
  Opt ref_c, ref_d;
  for (auto const& r : per_cycle) {
    if (*r.at("ChargeCapacity") > 0.0 && *r.at("DischargeCapacity") > 0.0) {
      ref_c = r.at("ChargeCapacity");
      ref_d = r.at("DischargeCapacity");
      break;
    }
  }
  for (auto& r : per_cycle) {
    r["ChargeCapacityRetention"] = ref_c ? Opt(*r["ChargeCapacity"] / *ref_c) : std::nullopt;
    r["DischargeCapacityRetention"] = ref_d ? Opt(*r["DischargeCapacity"] / *ref_d) : std::nullopt;
  }

  // Rollup bases and where each comes from.
  std::vector<std::pair<std::string, std::string>> bases = {
      {"ChargeCapacityRetention", "ChargeCapacityRetention"},
      {"ChargeCapacity", "ChargeCapacity"},
      {"ChargeEnergy", "ChargeEnergy"},
      {"ChargeVoltage", "~ChargeVoltage"},
      {"CoulombicEfficiency", "~CoulombicEfficiency"},
      {"DischargeCapacityRetention", "DischargeCapacityRetention"},
      {"DischargeCapacity", "DischargeCapacity"},
      {"DischargeEndCurrent", "DischargeEndCurrent"},
      {"DischargeEndVoltage", "DischargeEndVoltage"},
      {"DischargeEnergy", "DischargeEnergy"},
      {"DischargePower", "DischargePower"},
      {"DischargeResistance", "DischargeResistance"},
      {"DischargeVoltage", "~DischargeVoltage"},
      {"EndCurrent", "EndCurrent"},
      {"EndVoltage", "EndVoltage"},
      {"MidVoltage", "MidVoltage"},
      {"Power", "Power"},
      {"ResistanceOhms", "ResistanceOhms"},
      {"Voltage", "~Voltage"},
  };
  for (std::size_t k = 0; k < per_cycle.size(); ++k) {
    BruteCycle bc;
    for (auto const& [name, v] : per_cycle[k]) {
      if (name[0] != '~') bc.columns[name] = v;
    }
    for (auto const& [base, src] : bases) {
      std::vector<double> xs;
      for (std::size_t j = 0; j <= k; ++j) {
        if (auto v = per_cycle[j].at(src)) xs.push_back(*v);
      }
      Spread(xs, bc.rollup, base);
    }
    out.push_back(std::move(bc));
  }
  return out;
}

}  // namespace cyclebench::testing
