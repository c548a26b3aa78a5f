#include <cmath>
#include <random>
#include <stdexcept>

#include "strobe/io.hpp"
#include "strobe/lindblad.hpp"
#include "strobe/pauli_operator.hpp"

namespace strobe {

namespace {

using Eigen::VectorXcd;

struct Unraveling {
  PauliOperator k;                    // H - i sum rate op^dagger op
  std::vector<PauliOperator> jumps;   // sqrt(2 rate) op
  std::vector<PauliOperator> observables;
};

Unraveling prepare(const LindbladModel& model,
                   const std::vector<std::pair<std::string, PauliSum>>& observables) {
  Unraveling u;
  PauliSum k = model.hamiltonian().sum();
  for (const auto& j : model.jumps()) {
    if (j.rate == 0.0) continue;
    k.add(j.op.adjoint() * j.op, cplx(0.0, -j.rate));
    u.jumps.emplace_back(j.op * cplx(std::sqrt(2.0 * j.rate), 0.0));
  }
  u.k = PauliOperator(k);
  for (const auto& [name, o] : observables) {
    if (o.n_qubits() != model.n_qubits()) {
      throw std::invalid_argument("trajectories: observable '" + name + "' has the wrong size");
    }
    u.observables.emplace_back(o);
  }
  return u;
}

double norm2(const VectorXcd& v) { return v.squaredNorm(); }

// One RK4 step of d psi / dt = -i K psi.
void rk4_step(const PauliOperator& k, VectorXcd& psi, double dt, VectorXcd& k1, VectorXcd& k2,
              VectorXcd& k3, VectorXcd& k4, VectorXcd& tmp) {
  const auto n = static_cast<std::size_t>(psi.size());
  const cplx mi(0.0, -1.0);
  auto f = [&](const VectorXcd& in, VectorXcd& out) {
    k.apply({in.data(), n}, {out.data(), n});
    out *= mi;
  };
  f(psi, k1);
  tmp = psi + 0.5 * dt * k1;
  f(tmp, k2);
  tmp = psi + 0.5 * dt * k2;
  f(tmp, k3);
  tmp = psi + dt * k3;
  f(tmp, k4);
  psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Observable values [obs][time] and jump count of one sample.
struct Sample {
  std::vector<std::vector<double>> values;
  std::size_t jumps = 0;
};

Sample run_sample(const Unraveling& u, const VectorXcd& psi0, const std::vector<double>& times,
                  double dt, std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const auto n = static_cast<std::size_t>(psi0.size());

  Sample s;
  s.values.assign(u.observables.size(), std::vector<double>(times.size()));
  VectorXcd psi = psi0 / psi0.norm();
  VectorXcd k1(psi.size()), k2(psi.size()), k3(psi.size()), k4(psi.size()), tmp(psi.size());
  VectorXcd img(psi.size());
  double threshold = uniform(rng);
  double t = 0.0;
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    while (times[ti] - t > 1e-12 * std::max(1.0, times[ti])) {
      const double h = std::min(dt, times[ti] - t);
      rk4_step(u.k, psi, h, k1, k2, k3, k4, tmp);
      t += h;
      if (norm2(psi) <= threshold) {
        std::vector<double> weights(u.jumps.size());
        double total = 0.0;
        for (std::size_t j = 0; j < u.jumps.size(); ++j) {
          u.jumps[j].apply({psi.data(), n}, {img.data(), n});
          weights[j] = img.squaredNorm();
          total += weights[j];
        }
        if (total > 0.0) {
          double pick = uniform(rng) * total;
          std::size_t j = 0;
          while (j + 1 < weights.size() && pick >= weights[j]) pick -= weights[j++];
          u.jumps[j].apply({psi.data(), n}, {img.data(), n});
          psi = img / img.norm();
          ++s.jumps;
        } else {
          psi /= psi.norm();
        }
        threshold = uniform(rng);
      }
    }
    const double nn = norm2(psi);
    for (std::size_t o = 0; o < u.observables.size(); ++o) {
      s.values[o][ti] = u.observables[o].expectation({psi.data(), n}).real() / nn;
    }
  }
  return s;
}

TrajectoryStats run(const LindbladModel& model, const VectorXcd& psi0,
                    const std::vector<double>& times,
                    const std::vector<std::pair<std::string, PauliSum>>& observables,
                    const TrajectoryOptions& opts, bool parallel) {
  if (static_cast<std::uint64_t>(psi0.size()) != model.hamiltonian().dimension()) {
    throw std::invalid_argument("trajectories: initial state has the wrong dimension");
  }
  if (!(opts.dt > 0.0)) throw std::invalid_argument("trajectories: dt must be > 0");
  if (opts.n_samples < 2) throw std::invalid_argument("trajectories: need at least two samples");
  if (!std::is_sorted(times.begin(), times.end()) || (!times.empty() && times.front() < 0.0)) {
    throw std::invalid_argument("trajectories: times must be ascending and non-negative");
  }
  const Unraveling u = prepare(model, observables);
  std::vector<Sample> samples(opts.n_samples);
  const auto count = static_cast<std::int64_t>(opts.n_samples);
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::int64_t i = 0; i < count; ++i) {
    samples[i] = run_sample(u, psi0, times, opts.dt, opts.seed, static_cast<std::uint64_t>(i));
  }

  TrajectoryStats st;
  st.times = times;
  const double ns = static_cast<double>(opts.n_samples);
  for (std::size_t o = 0; o < observables.size(); ++o) {
    st.names.push_back(observables[o].first);
    std::vector<double> mean(times.size(), 0.0), err(times.size(), 0.0);
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      double m = 0.0;
      for (const auto& s : samples) m += s.values[o][ti];
      m /= ns;
      double var = 0.0;
      for (const auto& s : samples) var += (s.values[o][ti] - m) * (s.values[o][ti] - m);
      var /= ns - 1.0;
      mean[ti] = m;
      err[ti] = std::sqrt(var / ns);
    }
    st.mean.push_back(std::move(mean));
    st.stderr_.push_back(std::move(err));
  }
  for (const auto& s : samples) st.jump_counts.push_back(s.jumps);
  return st;
}

}  // namespace

TrajectoryStats trajectories(const LindbladModel& model, const VectorXcd& psi0,
                             const std::vector<double>& times,
                             const std::vector<std::pair<std::string, PauliSum>>& observables,
                             const TrajectoryOptions& opts) {
  return run(model, psi0, times, observables, opts, true);
}

TrajectoryStats trajectories_serial(const LindbladModel& model, const VectorXcd& psi0,
                                    const std::vector<double>& times,
                                    const std::vector<std::pair<std::string, PauliSum>>& observables,
                                    const TrajectoryOptions& opts) {
  return run(model, psi0, times, observables, opts, false);
}

std::string trajectory_csv(const TrajectoryStats& stats) {
  std::string out = csv_header("strobe.trajectory", 1, "t,observable,mean,stderr");
  for (std::size_t o = 0; o < stats.names.size(); ++o) {
    for (std::size_t ti = 0; ti < stats.times.size(); ++ti) {
      out += format_number(stats.times[ti]) + "," + stats.names[o] + "," +
             format_number(stats.mean[o][ti]) + "," + format_number(stats.stderr_[o][ti]) + "\n";
    }
  }
  return out;
}

}  // namespace strobe
