#ifndef PPG_IDENTIFICATION_HPP
#define PPG_IDENTIFICATION_HPP

#include "ppg/indicator_model.hpp"
#include "ppg/reference.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace ppg
{

/// Everything the measures need about one scored dataset at one poverty
/// cutoff: deprivation statuses, weighted deprivation shares, the poor set,
/// depth scores, and the censored variants of both matrices.
struct DeprivationProfile
{
   std::size_t rows = 0;
   std::size_t cols = 0;
   double poverty_cutoff = 0.0; // k

   std::vector<std::uint8_t> deprived;          // 1{x < z}
   std::vector<double> deprivation_share;       // c_i = sum_j w_j * deprived
   std::vector<std::uint8_t> poor;              // 1{c_i >= k}
   std::vector<double> depth;                   // positional depth score s
   std::vector<double> depth_deprived;          // deprived * s
   std::vector<std::uint8_t> deprived_censored; // poor * deprived
   std::vector<double> depth_censored;          // poor * deprived * s

   std::vector<double> values;           // encoded achievements (copied)
   std::vector<double> weight;           // survey weights (copied)
   std::vector<std::string> group;       // subgroup labels (copied)
   std::vector<double> indicator_weight; // w_j (copied, normalized)

   double weighted_total = 0.0; // W
   double weighted_poor = 0.0;  // q (weighted)
   std::vector<std::string> diagnostics;

   bool
   is_deprived( std::size_t i, std::size_t j ) const
   {
      return deprived[i * cols + j] != 0;
   }

   bool
   is_poor( std::size_t i ) const
   {
      return poor[i] != 0;
   }
};

/// Deprivation statuses: 1{value < cutoff} cell by cell.  Throws on masked
/// cells; identification needs a fully observed matrix.
std::vector<std::uint8_t>
deprivation_matrix( const Dataset& data,
                    const std::vector<IndicatorSpec>& specs );

/// Weighted deprivation share c_i of every row.
std::vector<double>
deprivation_score( std::span<const std::uint8_t> deprived, std::size_t rows,
                   std::size_t cols, const std::vector<IndicatorSpec>& specs );

/// True when a weighted deprivation share reaches the poverty cutoff,
/// under the same tiny threshold slack identify() applies so that scores
/// built from the same weights in any accumulation order classify alike.
bool
reaches_cutoff( double score, double poverty_cutoff );

/// Poor flags: 1{c_i >= k}.  k must lie in (0, 1].
std::vector<std::uint8_t>
identify( std::span<const double> scores, double poverty_cutoff );

/// The union poverty cutoff: the smallest indicator weight, so that one
/// deprivation in any indicator already counts as poor.
double
union_cutoff( const std::vector<IndicatorSpec>& specs );

/// The intersection poverty cutoff: poor only when deprived everywhere.
constexpr double
intersection_cutoff()
{
   return 1.0;
}

/// Build the full profile for one dataset against a fitted reference.
/// Validates that the reference covers every indicator by name and that the
/// dataset has no masked cells.
DeprivationProfile
build_profile( const Dataset& data, const std::vector<IndicatorSpec>& specs,
               const ReferenceDistribution& ref, double poverty_cutoff );

} // namespace ppg

#endif
