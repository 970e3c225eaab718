#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <mutex>
#include <string_view>
#include <vector>

namespace ssr {

//! Standard normal quantile. Rational approximation refined by one Halley
//! step; |Phi(z) - p| < 1e-12 on [1e-10, 1 - 1e-10].
double inverse_normal_cdf(double p);

//! Standard normal cdf and pdf.
double normal_cdf(double z);
double normal_pdf(double z);

enum class ScoreKind
{
  wilcoxon,
  van_der_waerden,
  wilcoxon_squared
};

std::string_view to_string(ScoreKind kind);
//! Accepts "w", "vdw", "w2" and the long names.
ScoreKind parse_score_kind(std::string_view name);

inline bool is_location(ScoreKind kind)
{
  return kind != ScoreKind::wilcoxon_squared;
}

//---------------------------------------------------------------------------//
/*!
 * Per-index normalizers nu_i, with nu_i^2 = (1/i) sum_{j<=i} J^2(j/(i+1)).
 *
 * Values are computed from the defining sum for every score and memoized.
 * Reads of already-computed entries are lock free; extension past the
 * current size is serialized by a mutex so a table may be shared by
 * concurrent simulation workers.
 */
class NormalizerTable
{
public:
  static constexpr std::size_t chunk_size = 1024;

  NormalizerTable(ScoreKind kind, std::size_t n_limit);

  NormalizerTable(NormalizerTable const&) = delete;
  NormalizerTable& operator=(NormalizerTable const&) = delete;

  //! nu_i for i >= 1; extends the table on demand.
  double operator()(std::size_t i) const
  {
    if (i - 1 < size_.load(std::memory_order_acquire))
    {
      return chunks_[(i - 1) / chunk_size][(i - 1) % chunk_size];
    }
    return extend_to(i);
  }

  //! Eagerly compute nu_1..nu_n.
  void reserve(std::size_t n) const;

  std::size_t size() const { return size_.load(std::memory_order_acquire); }
  std::size_t limit() const { return n_limit_; }

private:
  ScoreKind kind_;
  std::size_t n_limit_;
  mutable std::unique_ptr<std::unique_ptr<double[]>[]> chunks_;
  mutable std::atomic<std::size_t> size_{0};
  mutable std::mutex extend_mutex_;

  double extend_to(std::size_t i) const;
};

//---------------------------------------------------------------------------//
/*!
 * Score function J and the signed sequential rank statistics built from it.
 *
 * Location scores (Wilcoxon, Van der Waerden) are odd on (-1, 1) with
 * int_0^1 J^2 = 1. The dispersion score is the squared Wilcoxon score
 * J(u) = 3u^2 on (0, 1); its statistic depends on the rank only.
 *
 * Instances are cheap handles onto a process-wide normalizer table per kind.
 */
class ScoreSpec
{
public:
  //! Largest index for which normalizers may be requested.
  static constexpr std::size_t default_n_limit = std::size_t{1} << 27;

  explicit ScoreSpec(ScoreKind kind);

  ScoreKind kind() const { return kind_; }
  bool is_location() const { return ssr::is_location(kind_); }

  double J(double u) const;
  double J_prime(double u) const;

  //! nu_i from the defining sum.
  double normalizer(std::size_t i) const { return (*table_)(i); }
  NormalizerTable const& normalizers() const { return *table_; }

  //! sign * J(rank/(i+1)) / nu_i.
  double xi_location(std::size_t i, int sign, std::size_t rank) const;

  //! Statistic for this score: location kinds use the signed rank, the
  //! dispersion kind ignores the sign.
  double xi(std::size_t i, int sign, std::size_t rank) const;

private:
  ScoreKind kind_;
  NormalizerTable const* table_;
};

//! 6 rank^2 / ((2i+1)(i+1)) - 1.
double xi_dispersion(std::size_t i, std::size_t rank);

//! Closed form Wilcoxon normalizer, (2i+1)/(2(i+1)); cross-check only.
inline double wilcoxon_normalizer_squared(std::size_t i)
{
  auto const n = static_cast<double>(i);
  return (2 * n + 1) / (2 * (n + 1));
}

}  // namespace ssr
