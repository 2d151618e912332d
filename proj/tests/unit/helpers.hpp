#ifndef PPG_TEST_HELPERS_HPP
#define PPG_TEST_HELPERS_HPP

#include "ppg/indicator_model.hpp"

#include <string>
#include <utility>
#include <vector>

namespace ppg::test
{

/// Ordinal indicator with codes 0..levels-1, each level carrying one
/// synthetic label, plus an encoded cutoff and an (already normalized)
/// weight.
inline IndicatorSpec
ordinal_indicator( std::string name, int levels, double cutoff,
                   double weight )
{
   IndicatorSpec spec;
   spec.name = name;
   spec.source_column = name;
   spec.kind = IndicatorKind::ordinal;
   spec.categories.resize( std::size_t( levels ) );
   for( int c = 0; c < levels; ++c )
      spec.categories[std::size_t( c )].labels = {
          name + "_" + std::to_string( c ) };
   spec.cutoff = cutoff;
   spec.weight = weight;
   return spec;
}

inline IndicatorSpec
cardinal_indicator( std::string name, double cutoff, double weight )
{
   IndicatorSpec spec;
   spec.name = std::move( name );
   spec.source_column = spec.name;
   spec.kind = IndicatorKind::cardinal;
   spec.direction = Direction::higher_is_better;
   spec.cutoff = cutoff;
   spec.weight = weight;
   return spec;
}

/// Fully observed dataset from row-major values; unit weights and no
/// subgroup labels unless given.
inline Dataset
make_dataset( std::size_t rows, std::size_t cols, std::vector<double> values,
              std::vector<double> weight = {},
              std::vector<std::string> group = {} )
{
   Dataset data;
   data.rows = rows;
   data.cols = cols;
   data.values = std::move( values );
   data.missing.assign( rows * cols, 0 );
   data.weight = weight.empty() ? std::vector<double>( rows, 1.0 )
                                : std::move( weight );
   data.group = std::move( group );
   return data;
}

/// Four-person, two-indicator demo: a four-level housing ladder with
/// cutoff 2 and a binary water indicator with cutoff 1, equal weights.
/// Worked through by hand in the measure tests: at k = 0.5 the headcount is
/// 3/4, the intensity 5/6, the positional gap 14/15 and the index 7/12.
inline std::vector<IndicatorSpec>
demo_specs()
{
   std::vector<IndicatorSpec> specs;
   specs.push_back( ordinal_indicator( "housing", 4, 2.0, 0.5 ) );
   specs.push_back( ordinal_indicator( "water", 2, 1.0, 0.5 ) );
   return specs;
}

inline Dataset
demo_dataset()
{
   return make_dataset( 4, 2,
                        { 0.0, 0.0, //
                          1.0, 0.0, //
                          2.0, 0.0, //
                          3.0, 1.0 },
                        {}, { "north", "north", "south", "south" } );
}

} // namespace ppg::test

#endif
