#include "cellfree/evaluation.hpp"

#include <algorithm>
#include <cmath>

namespace cellfree {

double mse_sample(const CMatrix& h, const CMatrix& t, const RVector& p,
                  const RVector& sigma, int N) {
  const auto K = t.cols();
  const CMatrix err = p.cwiseSqrt().asDiagonal() * (h.adjoint() * t) -
                      CMatrix::Identity(K, K);
  double total = err.squaredNorm();
  for (Eigen::Index l = 0; l < sigma.size(); ++l)
    total += sigma(l) * t.middleRows(l * N, N).squaredNorm();
  return total;
}

double mse_objective(std::span<const ChannelPair> pairs,
                     std::span<const PrecoderSet> precoders, const RVector& p,
                     const RVector& sigma) {
  if (pairs.empty() || pairs.size() != precoders.size())
    throw EmptySampleSet("mse_objective needs matching non-empty samples");
  double total = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    total += mse_sample(pairs[i].now, precoders[i].t, p, sigma, pairs[i].N);
  return total / static_cast<double>(pairs.size());
}

MomentAccumulator::MomentAccumulator(int K)
    : K_(K),
      sum_gain_(CVector::Zero(K)),
      sum_gain_abs2_(RVector::Zero(K)),
      sum_cross_(RMatrix::Zero(K, K)),
      sum_power_(RVector::Zero(K)) {}

void MomentAccumulator::add(const CMatrix& h, const CMatrix& t) {
  const CMatrix g = h.adjoint() * t;  // g(j, k) = h_j^H t_k
  sum_gain_ += g.diagonal();
  sum_gain_abs2_ += g.diagonal().cwiseAbs2();
  sum_cross_ += g.cwiseAbs2();
  sum_power_ += t.colwise().squaredNorm().transpose();
  ++count_;
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  sum_gain_ += other.sum_gain_;
  sum_gain_abs2_ += other.sum_gain_abs2_;
  sum_cross_ += other.sum_cross_;
  sum_power_ += other.sum_power_;
  count_ += other.count_;
}

RateMoments MomentAccumulator::moments() const {
  if (count_ < 2)
    throw InsufficientSamples("rate moments need at least two realizations");
  const double n = static_cast<double>(count_);
  RateMoments m;
  m.count = count_;
  m.mean_gain = sum_gain_ / n;
  m.var_gain =
      ((sum_gain_abs2_ - n * m.mean_gain.cwiseAbs2()) / (n - 1.0))
          .cwiseMax(0.0);
  m.cross = sum_cross_ / n;
  m.cross.diagonal().setZero();
  m.power = sum_power_ / n;
  return m;
}

RateMoments estimate_rate_moments(Scheme scheme, const Scenario& s,
                                  const Aging& aging, int realizations,
                                  int pi_samples, const SeedPath& base) {
  if (realizations < 2)
    throw InsufficientSamples("rate moments need at least two realizations");
  const std::array<Scheme, 1> wanted = {scheme};
  const PrecoderFactory factory(s, aging, pi_samples, base, wanted);
  MomentAccumulator acc(s.num_ues());
  for (int i = 0; i < realizations; ++i) {
    Rng rng = derive_stream(base.with_realization(i).with_purpose(Purpose::Channel));
    const ChannelPair pair = sample_pair(s, aging, rng);
    acc.add(pair.now, factory.build(scheme, pair, i).t);
  }
  return acc.moments();
}

RVector sinr(const RateMoments& m, const RVector& p) {
  const auto K = m.mean_gain.size();
  RVector out(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const double signal = p(k) * std::norm(m.mean_gain(k));
    const double interference = p.dot(m.cross.col(k));  // diagonal is zero
    const double denom = p(k) * m.var_gain(k) + interference + m.power(k);
    out(k) = (signal > 0.0 && denom > 0.0) ? signal / denom : 0.0;
  }
  return out;
}

RVector sinr_and_rate(const RateMoments& m, const RVector& p) {
  return sinr(m, p).array().log1p() / std::log(2.0);
}

std::vector<CdfPoint> empirical_cdf(std::vector<double> values) {
  if (values.empty()) throw EmptySampleSet("empirical_cdf of no values");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  std::vector<CdfPoint> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double cdf = static_cast<double>(i + 1) / n;
    if (!out.empty() && out.back().rate == values[i])
      out.back().cdf = cdf;
    else
      out.push_back({values[i], cdf});
  }
  return out;
}

std::map<Scheme, std::vector<CdfPoint>> aggregate_cdf(
    std::span<const RateRecord> records) {
  if (records.empty()) throw EmptySampleSet("aggregate_cdf of no records");
  std::map<Scheme, std::vector<double>> by_scheme;
  for (const RateRecord& r : records) by_scheme[r.scheme].push_back(r.rate_bits);
  std::map<Scheme, std::vector<CdfPoint>> out;
  for (auto& [scheme, values] : by_scheme)
    out.emplace(scheme, empirical_cdf(std::move(values)));
  return out;
}

}  // namespace cellfree
