#ifndef PPG_DECOMPOSITION_HPP
#define PPG_DECOMPOSITION_HPP

#include "ppg/measures.hpp"

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ppg
{

/// One subgroup's slice of a decomposition.
struct SubgroupRow
{
   std::string label;
   double weighted_share = 0.0;  // W_l / W
   double headcount = 0.0;       // H within the subgroup
   double intensity = 0.0;       // A within the subgroup
   double positional_gap = 0.0;  // S within the subgroup
   double adjusted_gap = 0.0;    // P within the subgroup
   double contribution = 0.0;    // share * P_l / P_total (0 when P_total 0)
};

struct DecompositionReport
{
   double poverty_cutoff = 0.0;
   std::vector<SubgroupRow> rows; // ordered by subgroup label
   double total_adjusted_gap = 0.0;
   /// sum_l share_l * P_l - P_total; zero up to rounding when every
   /// subgroup is scored against the shared reference.
   double reconstruction_residual = 0.0;
   bool shared_reference = true;
   std::vector<std::string> diagnostics;
};

/// Population-share weighted decomposition of P by subgroup label, all
/// subgroups scored against the same reference distribution.
DecompositionReport
decompose_by_subgroup( const Dataset& data,
                       const std::vector<IndicatorSpec>& specs,
                       const ReferenceDistribution& ref,
                       double poverty_cutoff );

/// The deliberately inconsistent variant: every subgroup is scored against
/// its own within-subgroup distribution.  The weighted subgroup values no
/// longer reconstruct the population index; the report carries the residual
/// so callers can show exactly how far off it is.
DecompositionReport
decompose_with_subgroup_refs( const Dataset& data,
                              const std::vector<IndicatorSpec>& specs,
                              double poverty_cutoff );

/// Post-identification factor split of P: each indicator's share of the
/// censored depth mass.  Shares sum to 1 whenever P > 0.
std::vector<std::pair<std::string, double>>
indicator_contributions( const DeprivationProfile& prof,
                         const std::vector<IndicatorSpec>& specs );

/// One row of the poverty-cutoff dominance table.
struct DominanceRow
{
   std::string subgroup; // "all" for the full population
   double poverty_cutoff = 0.0;
   double headcount = 0.0;
   double adjusted_headcount = 0.0;
   double adjusted_gap = 0.0;
};

/// H, H*A and P over a grid of poverty cutoffs, for the population and per
/// subgroup when labels are present, all against the shared reference.
std::vector<DominanceRow>
dominance_curve( const Dataset& data, const std::vector<IndicatorSpec>& specs,
                 const ReferenceDistribution& ref,
                 std::span<const double> cutoffs );

} // namespace ppg

#endif
