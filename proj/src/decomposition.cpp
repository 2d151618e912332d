#include "ppg/decomposition.hpp"

#include "ppg/stable_sum.hpp"

#include <map>
#include <stdexcept>

namespace ppg
{

namespace
{

[[noreturn]] void
decomp_fail( const std::string& what )
{
   throw std::runtime_error( "decomposition: " + what );
}

/// Row indices per subgroup label, in deterministic label order.
std::map<std::string, std::vector<std::size_t>>
partition_rows( const Dataset& data )
{
   if( !data.has_groups() )
      decomp_fail( "dataset carries no subgroup labels" );
   std::map<std::string, std::vector<std::size_t>> groups;
   for( std::size_t i = 0; i < data.rows; ++i )
   {
      if( data.group[i].empty() )
         decomp_fail( "row " + std::to_string( i + 1 ) +
                      " has an empty subgroup label" );
      groups[data.group[i]].push_back( i );
   }
   return groups;
}

DecompositionReport
decompose_impl( const Dataset& data, const std::vector<IndicatorSpec>& specs,
                const ReferenceDistribution* shared_ref,
                double poverty_cutoff )
{
   auto groups = partition_rows( data );

   DecompositionReport report;
   report.poverty_cutoff = poverty_cutoff;
   report.shared_reference = shared_ref != nullptr;

   // Population index.  Under per-subgroup references the population is
   // still scored against its own in-sample distribution, which is exactly
   // what makes the reconstruction break.
   ReferenceDistribution own;
   const ReferenceDistribution* total_ref = shared_ref;
   if( !total_ref )
   {
      own = fit_reference( data, specs, RefMode::in_sample );
      total_ref = &own;
   }
   DeprivationProfile total_prof =
       build_profile( data, specs, *total_ref, poverty_cutoff );
   report.total_adjusted_gap = adjusted_index( total_prof ).value;
   double w_total = total_prof.weighted_total;

   StableSum reconstruction;
   for( const auto& [label, row_ids] : groups )
   {
      Dataset part = data.subset( row_ids );
      ReferenceDistribution part_ref;
      const ReferenceDistribution* ref = shared_ref;
      if( !ref )
      {
         part_ref = fit_reference( part, specs, RefMode::in_sample );
         ref = &part_ref;
      }
      DeprivationProfile prof =
          build_profile( part, specs, *ref, poverty_cutoff );

      SubgroupRow row;
      row.label = label;
      row.weighted_share = prof.weighted_total / w_total;
      row.headcount = headcount( prof );
      row.intensity = intensity( prof ).value;
      row.positional_gap = positional_gap( prof ).value;
      row.adjusted_gap = adjusted_index( prof ).value;
      reconstruction.add( row.weighted_share * row.adjusted_gap );
      report.rows.push_back( std::move( row ) );
   }

   double reconstructed = reconstruction.get();
   report.reconstruction_residual =
       reconstructed - report.total_adjusted_gap;
   for( SubgroupRow& row : report.rows )
      row.contribution =
          report.total_adjusted_gap > 0.0
              ? row.weighted_share * row.adjusted_gap /
                    report.total_adjusted_gap
              : 0.0;

   if( !report.shared_reference )
      report.diagnostics.push_back(
          "subgroups are scored against their own distributions; the "
          "weighted subgroup values do not reconstruct the population index "
          "(residual " +
          std::to_string( report.reconstruction_residual ) + ")" );
   return report;
}

} // namespace

DecompositionReport
decompose_by_subgroup( const Dataset& data,
                       const std::vector<IndicatorSpec>& specs,
                       const ReferenceDistribution& ref,
                       double poverty_cutoff )
{
   return decompose_impl( data, specs, &ref, poverty_cutoff );
}

DecompositionReport
decompose_with_subgroup_refs( const Dataset& data,
                              const std::vector<IndicatorSpec>& specs,
                              double poverty_cutoff )
{
   return decompose_impl( data, specs, nullptr, poverty_cutoff );
}

std::vector<std::pair<std::string, double>>
indicator_contributions( const DeprivationProfile& prof,
                         const std::vector<IndicatorSpec>& specs )
{
   if( specs.size() != prof.cols )
      decomp_fail( "indicator count does not match profile columns" );

   // Column j's slice of the censored depth mass; the slices sum to
   // P * W by construction.
   std::vector<double> mass( prof.cols, 0.0 );
   StableSum total;
   for( std::size_t j = 0; j < prof.cols; ++j )
   {
      StableSum column;
      for( std::size_t i = 0; i < prof.rows; ++i )
         column.add( prof.weight[i] * prof.indicator_weight[j] *
                     prof.depth_censored[i * prof.cols + j] );
      mass[j] = column.get();
      total.add( mass[j] );
   }
   double sum = total.get();
   std::vector<std::pair<std::string, double>> shares;
   shares.reserve( prof.cols );
   for( std::size_t j = 0; j < prof.cols; ++j )
      shares.emplace_back( specs[j].name, sum > 0.0 ? mass[j] / sum : 0.0 );
   return shares;
}

std::vector<DominanceRow>
dominance_curve( const Dataset& data, const std::vector<IndicatorSpec>& specs,
                 const ReferenceDistribution& ref,
                 std::span<const double> cutoffs )
{
   std::vector<DominanceRow> rows;
   auto add_rows = [&]( const Dataset& part, const std::string& label )
   {
      for( double k : cutoffs )
      {
         DeprivationProfile prof = build_profile( part, specs, ref, k );
         DominanceRow row;
         row.subgroup = label;
         row.poverty_cutoff = k;
         row.headcount = headcount( prof );
         row.adjusted_headcount = row.headcount * intensity( prof ).value;
         row.adjusted_gap = adjusted_index( prof ).value;
         rows.push_back( std::move( row ) );
      }
   };
   add_rows( data, "all" );
   if( data.has_groups() )
   {
      auto groups = partition_rows( data );
      for( const auto& [label, row_ids] : groups )
         add_rows( data.subset( row_ids ), label );
   }
   return rows;
}

} // namespace ppg
