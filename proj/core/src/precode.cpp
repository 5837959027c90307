// SPDX-License-Identifier: Apache-2.0

#include "iasim/precode.hpp"

#include <algorithm>
#include <cmath>

#include "iasim/linkeval.hpp"
#include "iasim/rng.hpp"

namespace iasim::precode {

namespace {

double stream_power(const NetworkConfig& c, int u) {
  return c.tx_power / c.streams[static_cast<size_t>(u)];
}

void validate_options(const ChannelSet& channels, const AlgoOptions& opts) {
  if (!(opts.tol > 0.0)) throw ContractViolation("algo options: tol must be positive");
  if (opts.max_iters < 1) throw ContractViolation("algo options: max_iters must be >= 1");
  if (!opts.noise_cov.empty()) {
    const NetworkConfig& cfg = channels.config();
    if (static_cast<int>(opts.noise_cov.size()) != cfg.users) {
      throw ContractViolation("algo options: one noise covariance per receiver required");
    }
    for (int i = 0; i < cfg.users; ++i) {
      const CMatrix& n = opts.noise_cov[static_cast<size_t>(i)];
      if (numkit::hermitian_defect(n) > 1e-10) {
        throw ContractViolation("algo options: noise covariance must be Hermitian");
      }
      if (numkit::hermitian_eig(n).eigenvalues.minCoeff() < -1e-10) {
        throw ContractViolation("algo options: noise covariance must be PSD");
      }
    }
  }
}

/// d least- (or most-) dominant eigenvectors of a Hermitian covariance.
CMatrix subspace_select(const CMatrix& q, Eigen::Index d, bool most_dominant) {
  const auto eig = numkit::hermitian_eig(q);
  const Eigen::Index n = q.rows();
  CMatrix out(n, d);
  for (Eigen::Index m = 0; m < d; ++m) {
    out.col(m) = most_dominant ? eig.eigenvectors.col(n - 1 - m) : eig.eigenvectors.col(m);
  }
  return out;
}

}  // namespace

const char* to_string(Feasibility f) {
  switch (f) {
    case Feasibility::kFeasible:
      return "feasible";
    case Feasibility::kInfeasible:
      return "infeasible";
    default:
      return "unknown";
  }
}

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kClosedFormIa:
      return "closed_form_ia";
    case Algorithm::kMinLeakage:
      return "min_leakage";
    case Algorithm::kMaxSinr:
      return "max_sinr";
    case Algorithm::kWmmse:
      return "wmmse";
    default:
      return "tdma";
  }
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "closed_form_ia") return Algorithm::kClosedFormIa;
  if (name == "min_leakage") return Algorithm::kMinLeakage;
  if (name == "max_sinr") return Algorithm::kMaxSinr;
  if (name == "wmmse") return Algorithm::kWmmse;
  if (name == "tdma") return Algorithm::kTdma;
  throw ConfigError("unknown algorithm name '" + name + "'");
}

Feasibility check_feasibility(const NetworkConfig& config) {
  config.validate();
  const size_t k = static_cast<size_t>(config.users);
  const int nt = config.tx_antennas[0];
  const int nr = config.rx_antennas[0];
  const int d = config.streams[0];
  for (size_t u = 0; u < k; ++u) {
    if (config.tx_antennas[u] != nt || config.rx_antennas[u] != nr || config.streams[u] != d) {
      return Feasibility::kUnknown;
    }
    for (size_t l = 0; l < k; ++l) {
      if (!config.connectivity[u][l]) return Feasibility::kUnknown;
    }
  }
  // Proper-system counting condition d <= (nt + nr) / (K + 1).
  return d * (config.users + 1) <= nt + nr ? Feasibility::kFeasible : Feasibility::kInfeasible;
}

PrecoderSet random_precoders(const NetworkConfig& config, uint64_t seed) {
  PrecoderSet out;
  out.f.resize(static_cast<size_t>(config.users));
  for (int u = 0; u < config.users; ++u) {
    const int nt = config.tx_antennas[static_cast<size_t>(u)];
    const int d = config.streams[static_cast<size_t>(u)];
    rng::Substream stream(seed, rng::StreamDomain::kPrecoderInit, static_cast<uint32_t>(u));
    CMatrix g(nt, d);
    for (int r = 0; r < nt; ++r) {
      for (int c = 0; c < d; ++c) {
        g(r, c) = stream.complex_gaussian();
      }
    }
    out.f[static_cast<size_t>(u)] = numkit::orthonormalize(g, d);
  }
  return out;
}

IaSolution closed_form_ia_3user(const ChannelSet& channels) {
  const NetworkConfig& cfg = channels.config();
  if (cfg.users != 3) {
    throw ContractViolation("closed_form_ia_3user: exactly 3 users required");
  }
  const int d = cfg.streams[0];
  for (int u = 0; u < 3; ++u) {
    const auto su = static_cast<size_t>(u);
    if (cfg.streams[su] != d || cfg.tx_antennas[su] != 2 * d || cfg.rx_antennas[su] != 2 * d) {
      throw ContractViolation("closed_form_ia_3user: needs nt = nr = 2d for every user");
    }
    for (int l = 0; l < 3; ++l) {
      if (!cfg.link_active(u, l)) {
        throw ContractViolation("closed_form_ia_3user: full connectivity required");
      }
    }
  }

  // Chain the three pairwise alignment conditions into the round-trip map whose
  // invariant subspaces give the first precoder:
  //   span(H20 F0) = span(H21 F1), span(H10 F0) = span(H12 F2),
  //   span(H01 F1) = span(H02 F2).
  const CMatrix e = numkit::solve(channels.h(2, 0),
                                  channels.h(2, 1) * numkit::solve(channels.h(0, 1),
                                                                   channels.h(0, 2)) *
                                      numkit::solve(channels.h(1, 2), channels.h(1, 0)));
  const auto eig = numkit::general_eig(e);
  const CMatrix f0 = numkit::orthonormalize(eig.eigenvectors.leftCols(d), d);

  IaSolution out;
  out.precoders.f.resize(3);
  out.precoders.f[0] = f0;
  out.precoders.f[1] =
      numkit::orthonormalize(numkit::solve(channels.h(2, 1), channels.h(2, 0) * f0), d);
  out.precoders.f[2] =
      numkit::orthonormalize(numkit::solve(channels.h(1, 2), channels.h(1, 0) * f0), d);

  // Interference is aligned into a d-dimensional subspace of the 2d receive
  // space; the combiner spans its orthogonal complement.
  out.combiners.w.resize(3);
  for (int i = 0; i < 3; ++i) {
    CMatrix q = CMatrix::Zero(2 * d, 2 * d);
    for (int l = 0; l < 3; ++l) {
      if (l == i) continue;
      const CMatrix hf = channels.h(i, l) * out.precoders.f[static_cast<size_t>(l)];
      q.noalias() += hf * hf.adjoint();
    }
    out.combiners.w[static_cast<size_t>(i)] = subspace_select(q, d, /*most_dominant=*/false);
  }
  return out;
}

namespace detail {

LeakageDescentResult leakage_descent(const ChannelSet& channels, const AlgoOptions& opts,
                                     const DescentHooks* hooks) {
  validate_options(channels, opts);
  const NetworkConfig& cfg = channels.config();
  const int k = cfg.users;
  const bool most_dominant = hooks != nullptr && hooks->select_most_dominant;

  LeakageDescentResult res;
  res.precoders = random_precoders(cfg, opts.seed);
  res.combiners.w.resize(static_cast<size_t>(k));

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    // Combiner step: least-interference receive subspaces.
    for (int i = 0; i < k; ++i) {
      const int nr = cfg.rx_antennas[static_cast<size_t>(i)];
      CMatrix q = CMatrix::Zero(nr, nr);
      for (int l = 0; l < k; ++l) {
        if (l == i || !cfg.link_active(i, l)) continue;
        const CMatrix hf = channels.h(i, l) * res.precoders.f[static_cast<size_t>(l)];
        q.noalias() += stream_power(cfg, l) * (hf * hf.adjoint());
      }
      if (hooks != nullptr && hooks->cov_noise) {
        q += hooks->cov_noise(i, 0, iter, nr);
      }
      res.combiners.w[static_cast<size_t>(i)] =
          subspace_select(q, cfg.streams[static_cast<size_t>(i)], most_dominant);
    }
    // Precoder step: the same rule on the reciprocal network, where the
    // reverse channel of link (i, l) is H_il^*.
    for (int l = 0; l < k; ++l) {
      const int nt = cfg.tx_antennas[static_cast<size_t>(l)];
      CMatrix q = CMatrix::Zero(nt, nt);
      for (int i = 0; i < k; ++i) {
        if (i == l || !cfg.link_active(i, l)) continue;
        const CMatrix hw = channels.h(i, l).adjoint() * res.combiners.w[static_cast<size_t>(i)];
        q.noalias() += stream_power(cfg, l) * (hw * hw.adjoint());
      }
      if (hooks != nullptr && hooks->cov_noise) {
        q += hooks->cov_noise(l, 1, iter, nt);
      }
      res.precoders.f[static_cast<size_t>(l)] =
          subspace_select(q, cfg.streams[static_cast<size_t>(l)], most_dominant);
    }

    res.leakage_trace.push_back(linkeval::leakage(channels, res.precoders, res.combiners));
    const size_t t = res.leakage_trace.size();
    if (t >= 2 &&
        std::abs(res.leakage_trace[t - 1] - res.leakage_trace[t - 2]) <= opts.tol) {
      break;
    }
  }
  return res;
}

}  // namespace detail

LeakageDescentResult min_leakage(const ChannelSet& channels, const AlgoOptions& opts) {
  return detail::leakage_descent(channels, opts, nullptr);
}

IaSolution max_sinr(const ChannelSet& channels, const AlgoOptions& opts) {
  validate_options(channels, opts);
  const NetworkConfig& cfg = channels.config();
  const int k = cfg.users;

  std::vector<CMatrix> f(static_cast<size_t>(k));
  {
    const PrecoderSet init = random_precoders(cfg, opts.seed);
    for (int u = 0; u < k; ++u) f[static_cast<size_t>(u)] = init.f[static_cast<size_t>(u)];
  }
  std::vector<CMatrix> w(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i) {
    w[static_cast<size_t>(i)] = CMatrix::Zero(cfg.rx_antennas[static_cast<size_t>(i)],
                                              cfg.streams[static_cast<size_t>(i)]);
  }

  std::vector<double> sinr_prev;
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    std::vector<double> sinr_now;
    // Combiner step: per-stream MMSE direction against all other streams.
    for (int i = 0; i < k; ++i) {
      const size_t ui = static_cast<size_t>(i);
      const int nr = cfg.rx_antennas[ui];
      CMatrix b_total = linkeval::effective_noise(cfg, opts.noise_cov, i);
      for (int l = 0; l < k; ++l) {
        if (!cfg.link_active(i, l)) continue;
        const CMatrix hf = channels.h(i, l) * f[static_cast<size_t>(l)];
        b_total.noalias() += stream_power(cfg, l) * (hf * hf.adjoint());
      }
      const CMatrix h_sig = channels.h(i, i) * f[ui];
      for (int m = 0; m < cfg.streams[ui]; ++m) {
        const CVector hm = h_sig.col(m);
        CMatrix b = b_total;
        b.noalias() -= stream_power(cfg, i) * (hm * hm.adjoint());
        const CVector dir = Eigen::PartialPivLU<CMatrix>(b).solve(hm);
        const double nrm = dir.norm();
        if (nrm > 0.0) {
          w[ui].col(m) = dir / nrm;
        } else {
          w[ui].col(m) = CVector::Unit(nr, m % nr);
        }
        const double sig = stream_power(cfg, i) * std::norm(cplx(w[ui].col(m).dot(hm)));
        const double den = std::real(cplx(w[ui].col(m).dot(b * w[ui].col(m))));
        sinr_now.push_back(den > 0.0 ? sig / den : 0.0);
      }
    }
    // Precoder step: identical rule on the reciprocal network. Uncoordinated
    // colored noise is not reciprocal, so the reverse side always sees white
    // noise even when noise_cov is set.
    for (int l = 0; l < k; ++l) {
      const size_t ul = static_cast<size_t>(l);
      const int nt = cfg.tx_antennas[ul];
      CMatrix b_total = cfg.noise_var * CMatrix::Identity(nt, nt);
      for (int i = 0; i < k; ++i) {
        if (!cfg.link_active(i, l)) continue;
        const CMatrix hw = channels.h(i, l).adjoint() * w[static_cast<size_t>(i)];
        b_total.noalias() += stream_power(cfg, i) * (hw * hw.adjoint());
      }
      const CMatrix h_sig = channels.h(l, l).adjoint() * w[ul];
      for (int m = 0; m < cfg.streams[ul]; ++m) {
        const CVector hm = h_sig.col(m);
        CMatrix b = b_total;
        b.noalias() -= stream_power(cfg, l) * (hm * hm.adjoint());
        const CVector dir = Eigen::PartialPivLU<CMatrix>(b).solve(hm);
        const double nrm = dir.norm();
        if (nrm > 0.0) {
          f[ul].col(m) = dir / nrm;
        } else {
          f[ul].col(m) = CVector::Unit(nt, m % nt);
        }
      }
    }

    if (!sinr_prev.empty()) {
      double change = 0.0;
      for (size_t s = 0; s < sinr_now.size(); ++s) {
        change = std::max(change, std::abs(sinr_now[s] - sinr_prev[s]) /
                                      std::max(1.0, std::abs(sinr_prev[s])));
      }
      if (change <= opts.tol) {
        sinr_prev = std::move(sinr_now);
        break;
      }
    }
    sinr_prev = std::move(sinr_now);
  }

  IaSolution out;
  out.precoders.f.resize(static_cast<size_t>(k));
  out.combiners.w.resize(static_cast<size_t>(k));
  for (int u = 0; u < k; ++u) {
    const size_t uu = static_cast<size_t>(u);
    out.precoders.f[uu] = numkit::orthonormalize(f[uu], cfg.streams[uu]);
    out.combiners.w[uu] = numkit::orthonormalize(w[uu], cfg.streams[uu]);
  }
  return out;
}

WmmseResult wmmse_sum_rate(const ChannelSet& channels, const AlgoOptions& opts) {
  validate_options(channels, opts);
  const NetworkConfig& cfg = channels.config();
  const int k = cfg.users;
  const double p = cfg.tx_power;

  std::vector<CMatrix> v(static_cast<size_t>(k));
  {
    const PrecoderSet init = random_precoders(cfg, opts.seed);
    for (int u = 0; u < k; ++u) {
      v[static_cast<size_t>(u)] = std::sqrt(stream_power(cfg, u)) * init.f[static_cast<size_t>(u)];
    }
  }
  std::vector<CMatrix> u_rx(static_cast<size_t>(k)), g_w(static_cast<size_t>(k));

  WmmseResult out;
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    // MMSE receivers and weights.
    for (int i = 0; i < k; ++i) {
      const size_t ui = static_cast<size_t>(i);
      CMatrix r = linkeval::effective_noise(cfg, opts.noise_cov, i);
      for (int l = 0; l < k; ++l) {
        if (!cfg.link_active(i, l)) continue;
        const CMatrix hv = channels.h(i, l) * v[static_cast<size_t>(l)];
        r.noalias() += hv * hv.adjoint();
      }
      const CMatrix hv_sig = channels.h(i, i) * v[ui];
      u_rx[ui] = Eigen::LLT<CMatrix>(r).solve(hv_sig);
      const Eigen::Index d = v[ui].cols();
      const CMatrix e = CMatrix::Identity(d, d) - u_rx[ui].adjoint() * hv_sig;
      g_w[ui] = Eigen::PartialPivLU<CMatrix>(e).solve(CMatrix::Identity(d, d));
    }
    // Precoders from the weighted-MMSE first-order condition, per-user power
    // enforced by bisection on the multiplier.
    for (int l = 0; l < k; ++l) {
      const size_t ul = static_cast<size_t>(l);
      const int nt = cfg.tx_antennas[ul];
      CMatrix a = CMatrix::Zero(nt, nt);
      for (int i = 0; i < k; ++i) {
        if (!cfg.link_active(i, l)) continue;
        const CMatrix hu = channels.h(i, l).adjoint() * u_rx[static_cast<size_t>(i)];
        a.noalias() += hu * g_w[static_cast<size_t>(i)] * hu.adjoint();
      }
      a = 0.5 * (a + a.adjoint());  // keep exactly Hermitian under roundoff
      const CMatrix rhs = channels.h(l, l).adjoint() * u_rx[ul] * g_w[ul];

      const auto power_at = [&](double mu) {
        const CMatrix m = a + mu * CMatrix::Identity(nt, nt);
        return (Eigen::LLT<CMatrix>(m).solve(rhs)).squaredNorm();
      };
      // mu = 0 may already satisfy the budget when A is well conditioned.
      double mu = 0.0;
      bool solved = false;
      {
        Eigen::PartialPivLU<CMatrix> lu(a);
        if (lu.rcond() > 1e-12) {
          const CMatrix cand = lu.solve(rhs);
          if (cand.squaredNorm() <= p * (1.0 + 1e-12)) {
            v[ul] = cand;
            solved = true;
          }
        }
      }
      if (!solved) {
        double hi = std::max(1e-12, std::real(a.trace()) / nt * 1e-6);
        int doublings = 0;
        while (power_at(hi) > p) {
          hi *= 2.0;
          if (++doublings > 200) {
            throw NumericalFailure("wmmse: multiplier bracket not found after 200 doublings");
          }
        }
        double lo = 0.0;
        for (int b = 0; b < 120; ++b) {
          mu = 0.5 * (lo + hi);
          if (power_at(mu) > p) {
            lo = mu;
          } else {
            hi = mu;
          }
        }
        mu = hi;  // feasible side of the bracket
        v[ul] = Eigen::LLT<CMatrix>(a + mu * CMatrix::Identity(nt, nt)).solve(rhs);
      }
    }

    out.rate_trace.push_back(linkeval::sum_rate_raw(channels, v, nullptr,
                                                    opts.noise_cov.empty() ? nullptr
                                                                           : &opts.noise_cov)
                                 .sum_rate);
    const size_t t = out.rate_trace.size();
    if (t >= 2 && std::abs(out.rate_trace[t - 1] - out.rate_trace[t - 2]) <= opts.tol) break;
  }

  out.precoders = v;
  out.per_user_power.resize(static_cast<size_t>(k));
  out.combiners.w.resize(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i) {
    const size_t ui = static_cast<size_t>(i);
    out.per_user_power[ui] = v[ui].squaredNorm();
    const int nr = cfg.rx_antennas[ui];
    const int d = cfg.streams[ui];
    bool ok = u_rx[ui].size() > 0 && u_rx[ui].norm() > 1e-14;
    if (ok) {
      try {
        out.combiners.w[ui] = numkit::orthonormalize(u_rx[ui], d);
      } catch (const DegenerateInput&) {
        ok = false;
      }
    }
    if (!ok) {
      out.combiners.w[ui] = CMatrix::Identity(nr, nr).leftCols(d);
    }
  }
  return out;
}

WaterfillResult waterfill(const CMatrix& h, double power, double noise_var) {
  if (!(power > 0.0) || !(noise_var > 0.0)) {
    throw ContractViolation("waterfill: power and noise_var must be positive");
  }
  const auto dec = numkit::svd(h);
  std::vector<double> gain;
  for (Eigen::Index i = 0; i < dec.singular_values.size(); ++i) {
    const double s = dec.singular_values[i];
    if (s * s / noise_var > 1e-300) gain.push_back(s * s / noise_var);
  }
  WaterfillResult out;
  if (gain.empty()) {
    out.precoder = CMatrix::Zero(h.cols(), 0);
    return out;
  }
  // Gains are descending; pick the largest active set with positive allocations.
  size_t active = 0;
  double level = 0.0;
  double inv_sum = 0.0;
  for (size_t m = 1; m <= gain.size(); ++m) {
    inv_sum += 1.0 / gain[m - 1];
    const double candidate = (power + inv_sum) / static_cast<double>(m);
    if (candidate > 1.0 / gain[m - 1]) {
      active = m;
      level = candidate;
    }
  }
  out.mode_power.assign(gain.size(), 0.0);
  out.precoder = CMatrix::Zero(h.cols(), static_cast<Eigen::Index>(active));
  for (size_t m = 0; m < active; ++m) {
    out.mode_power[m] = level - 1.0 / gain[m];
    out.capacity_bits += std::log2(level * gain[m]);
    out.precoder.col(static_cast<Eigen::Index>(m)) =
        std::sqrt(out.mode_power[m]) * dec.v.col(static_cast<Eigen::Index>(m));
  }
  return out;
}

double TdmaSchedule::rate() const {
  double acc = 0.0;
  for (double r : solo_rate) acc += r;
  return time_share * acc;
}

TdmaSchedule tdma_baseline(const ChannelSet& channels) {
  const NetworkConfig& cfg = channels.config();
  TdmaSchedule out;
  out.time_share = 1.0 / cfg.users;
  for (int i = 0; i < cfg.users; ++i) {
    const auto wf = waterfill(channels.h(i, i), cfg.tx_power, cfg.noise_var);
    out.solo_rate.push_back(wf.capacity_bits);
    out.precoders.push_back(wf.precoder);
  }
  return out;
}

}  // namespace iasim::precode
