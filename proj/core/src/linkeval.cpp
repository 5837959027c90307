// SPDX-License-Identifier: Apache-2.0

#include "iasim/linkeval.hpp"

#include <cmath>

namespace iasim::linkeval {

namespace {

double stream_power(const NetworkConfig& c, int u) {
  return c.tx_power / c.streams[static_cast<size_t>(u)];
}

using numkit::log2_det_hpd;

void check_shapes(const ChannelSet& ch, const std::vector<CMatrix>& v, const CombinerSet* w) {
  const NetworkConfig& cfg = ch.config();
  if (static_cast<int>(v.size()) != cfg.users) {
    throw ContractViolation("linkeval: one precoder per user required");
  }
  for (int i = 0; i < cfg.users; ++i) {
    if (v[static_cast<size_t>(i)].rows() != cfg.tx_antennas[static_cast<size_t>(i)]) {
      throw ContractViolation("linkeval: precoder row count must match tx antennas");
    }
  }
  if (w != nullptr) {
    if (static_cast<int>(w->w.size()) != cfg.users) {
      throw ContractViolation("linkeval: one combiner per user required");
    }
    for (int i = 0; i < cfg.users; ++i) {
      if (w->w[static_cast<size_t>(i)].rows() != cfg.rx_antennas[static_cast<size_t>(i)]) {
        throw ContractViolation("linkeval: combiner row count must match rx antennas");
      }
    }
  }
}

LinkMetrics evaluate(const ChannelSet& ch, const std::vector<CMatrix>& v, const CombinerSet* w,
                     const std::vector<CMatrix>* noise_cov) {
  check_shapes(ch, v, w);
  const NetworkConfig& cfg = ch.config();
  const int k = cfg.users;
  static const std::vector<CMatrix> kNoCov;
  const std::vector<CMatrix>& ncov = noise_cov ? *noise_cov : kNoCov;

  LinkMetrics out;
  out.per_user_rate.resize(static_cast<size_t>(k), 0.0);
  out.per_stream_sinr.resize(static_cast<size_t>(k));

  for (int i = 0; i < k; ++i) {
    const size_t ui = static_cast<size_t>(i);
    const int nr = cfg.rx_antennas[ui];
    const CMatrix& vi = v[ui];
    const Eigen::Index d = vi.cols();

    CMatrix q_int = CMatrix::Zero(nr, nr);
    for (int l = 0; l < k; ++l) {
      if (l == i || !cfg.link_active(i, l)) continue;
      const CMatrix hv = ch.h(i, l) * v[static_cast<size_t>(l)];
      q_int.noalias() += hv * hv.adjoint();
    }
    const CMatrix hv_sig = ch.h(i, i) * vi;
    const CMatrix q_sig = hv_sig * hv_sig.adjoint();
    const CMatrix n_i = effective_noise(cfg, ncov, i);

    if (d == 0) {
      out.per_stream_sinr[ui] = {};
      continue;
    }

    double rate;
    if (w != nullptr) {
      const CMatrix& wi = w->w[ui];
      const CMatrix b = wi.adjoint() * (q_int + n_i) * wi;
      const CMatrix s = wi.adjoint() * q_sig * wi;
      rate = log2_det_hpd(b + s) - log2_det_hpd(b);
      // Per-stream SINR through the given combiner columns.
      out.per_stream_sinr[ui].resize(static_cast<size_t>(wi.cols()));
      for (Eigen::Index m = 0; m < wi.cols(); ++m) {
        const CVector wm = wi.col(m);
        CMatrix other = q_int + n_i;
        for (Eigen::Index n = 0; n < d; ++n) {
          if (n == m) continue;
          other.noalias() += hv_sig.col(n) * hv_sig.col(n).adjoint();
        }
        const double sig =
            (m < d) ? std::norm(cplx(wm.dot(hv_sig.col(m)))) : 0.0;
        const double denom = std::real(cplx(wm.dot(other * wm)));
        out.per_stream_sinr[ui][static_cast<size_t>(m)] = denom > 0.0 ? sig / denom : 0.0;
      }
    } else {
      const CMatrix b = q_int + n_i;
      rate = log2_det_hpd(b + q_sig) - log2_det_hpd(b);
      // Per-stream MMSE SINR: everything except the stream itself is noise.
      out.per_stream_sinr[ui].resize(static_cast<size_t>(d));
      for (Eigen::Index m = 0; m < d; ++m) {
        CMatrix r_other = b;
        for (Eigen::Index n = 0; n < d; ++n) {
          if (n == m) continue;
          r_other.noalias() += hv_sig.col(n) * hv_sig.col(n).adjoint();
        }
        const CVector hm = hv_sig.col(m);
        const CVector x = Eigen::PartialPivLU<CMatrix>(r_other).solve(hm);
        out.per_stream_sinr[ui][static_cast<size_t>(m)] = std::real(cplx(hm.dot(x)));
      }
    }
    out.per_user_rate[ui] = rate;
    out.sum_rate += rate;
  }
  return out;
}

}  // namespace

CMatrix effective_noise(const NetworkConfig& config, const std::vector<CMatrix>& noise_cov,
                        int i) {
  const int nr = config.rx_antennas[static_cast<size_t>(i)];
  if (!noise_cov.empty()) {
    const CMatrix& n = noise_cov[static_cast<size_t>(i)];
    if (n.rows() != nr || n.cols() != nr) {
      throw ContractViolation("noise covariance shape must match rx antennas");
    }
    return n;
  }
  return config.noise_var * CMatrix::Identity(nr, nr);
}

double leakage(const ChannelSet& channels, const PrecoderSet& f, const CombinerSet& w) {
  check_shapes(channels, f.f, &w);
  const NetworkConfig& cfg = channels.config();
  double acc = 0.0;
  for (int i = 0; i < cfg.users; ++i) {
    for (int l = 0; l < cfg.users; ++l) {
      if (l == i || !cfg.link_active(i, l)) continue;
      const CMatrix proj =
          w.w[static_cast<size_t>(i)].adjoint() * channels.h(i, l) * f.f[static_cast<size_t>(l)];
      acc += stream_power(cfg, l) * proj.squaredNorm();
    }
  }
  return acc;
}

LinkMetrics sum_rate(const ChannelSet& channels, const PrecoderSet& f, const CombinerSet* w,
                     const std::vector<CMatrix>* noise_cov) {
  const NetworkConfig& cfg = channels.config();
  std::vector<CMatrix> v(f.f.size());
  for (size_t i = 0; i < f.f.size(); ++i) {
    v[i] = std::sqrt(stream_power(cfg, static_cast<int>(i))) * f.f[i];
  }
  LinkMetrics m = evaluate(channels, v, w, noise_cov);
  if (w != nullptr) m.leakage = leakage(channels, f, *w);
  return m;
}

LinkMetrics sum_rate_raw(const ChannelSet& channels, const std::vector<CMatrix>& v,
                         const CombinerSet* w, const std::vector<CMatrix>* noise_cov) {
  return evaluate(channels, v, w, noise_cov);
}

double fit_dof_slope(const std::vector<double>& snr_db_points,
                     const std::vector<double>& sum_rates) {
  if (snr_db_points.size() < 2) {
    throw ContractViolation("fit_dof_slope: need at least 2 points");
  }
  if (snr_db_points.size() != sum_rates.size()) {
    throw ContractViolation("fit_dof_slope: point/rate size mismatch");
  }
  for (size_t i = 0; i < snr_db_points.size(); ++i) {
    if (snr_db_points[i] < 20.0) {
      throw ContractViolation("fit_dof_slope: all SNR points must be >= 20 dB");
    }
    if (i > 0 && snr_db_points[i] <= snr_db_points[i - 1]) {
      throw ContractViolation("fit_dof_slope: SNR points must be ascending");
    }
  }
  const double log2_10_over_10 = std::log2(10.0) / 10.0;
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(snr_db_points.size());
  for (size_t i = 0; i < snr_db_points.size(); ++i) {
    mx += snr_db_points[i] * log2_10_over_10;
    my += sum_rates[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < snr_db_points.size(); ++i) {
    const double dx = snr_db_points[i] * log2_10_over_10 - mx;
    sxx += dx * dx;
    sxy += dx * (sum_rates[i] - my);
  }
  return sxy / sxx;
}

}  // namespace iasim::linkeval
