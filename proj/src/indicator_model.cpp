#include "ppg/indicator_model.hpp"

#include "ppg/stable_sum.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ppg
{

namespace
{

using nlohmann::json;

[[noreturn]] void
spec_fail( const std::string& what )
{
   throw std::runtime_error( "spec: " + what );
}

void
check_keys( const json& obj, const std::set<std::string>& allowed,
            const std::string& where )
{
   for( auto it = obj.begin(); it != obj.end(); ++it )
      if( !allowed.count( it.key() ) )
         spec_fail( where + ": unknown key '" + it.key() + "'" );
}

std::string
get_string( const json& obj, const std::string& key, const std::string& where )
{
   if( !obj.contains( key ) )
      spec_fail( where + ": missing key '" + key + "'" );
   if( !obj[key].is_string() )
      spec_fail( where + ": key '" + key + "' must be a string" );
   return obj[key].get<std::string>();
}

double
get_number( const json& obj, const std::string& key, const std::string& where )
{
   if( !obj.contains( key ) )
      spec_fail( where + ": missing key '" + key + "'" );
   if( !obj[key].is_number() )
      spec_fail( where + ": key '" + key + "' must be a number" );
   return obj[key].get<double>();
}

IndicatorSpec
parse_indicator( const json& node, std::size_t index )
{
   std::string where = "indicator #" + std::to_string( index + 1 );
   if( !node.is_object() )
      spec_fail( where + ": must be an object" );

   IndicatorSpec ind;
   ind.name = get_string( node, "name", where );
   if( ind.name.empty() )
      spec_fail( where + ": name must be nonempty" );
   where = "indicator '" + ind.name + "'";

   check_keys( node,
               { "name", "source_column", "kind", "categories", "direction",
                 "cutoff_z", "weight_w" },
               where );

   ind.source_column = node.contains( "source_column" )
                           ? get_string( node, "source_column", where )
                           : ind.name;
   if( ind.source_column.empty() )
      spec_fail( where + ": source_column must be nonempty" );

   std::string kind = get_string( node, "kind", where );
   if( kind == "ordinal" )
      ind.kind = IndicatorKind::ordinal;
   else if( kind == "cardinal" )
      ind.kind = IndicatorKind::cardinal;
   else
      spec_fail( where + ": kind must be 'ordinal' or 'cardinal'" );

   double cutoff = get_number( node, "cutoff_z", where );
   double weight = get_number( node, "weight_w", where );
   if( !std::isfinite( weight ) || weight <= 0.0 )
      spec_fail( where + ": weight_w must be a positive finite number" );
   ind.weight = weight;

   if( ind.kind == IndicatorKind::ordinal )
   {
      if( node.contains( "direction" ) )
         spec_fail( where + ": direction applies to cardinal indicators only" );
      if( !node.contains( "categories" ) || !node["categories"].is_array() )
         spec_fail( where + ": ordinal indicator needs a categories array" );

      std::set<std::string> seen;
      for( const json& cat : node["categories"] )
      {
         Category category;
         if( cat.is_string() )
            category.labels.push_back( cat.get<std::string>() );
         else if( cat.is_array() )
         {
            for( const json& label : cat )
            {
               if( !label.is_string() )
                  spec_fail( where + ": category labels must be strings" );
               category.labels.push_back( label.get<std::string>() );
            }
         }
         else
            spec_fail( where +
                       ": each category is a label or an array of labels" );
         if( category.labels.empty() )
            spec_fail( where + ": empty category" );
         for( const std::string& label : category.labels )
            if( !seen.insert( label ).second )
               spec_fail( where + ": duplicate category label '" + label +
                          "'" );
         ind.categories.push_back( std::move( category ) );
      }
      if( ind.categories.size() < 2 )
         spec_fail( where + ": ordinal indicator needs at least 2 categories" );

      double top = double( ind.categories.size() - 1 );
      if( cutoff != std::floor( cutoff ) || cutoff < 1.0 || cutoff > top )
         spec_fail( where + ": cutoff_z must be an integer code in [1, " +
                    std::to_string( std::size_t( top ) ) + "]" );
      ind.cutoff = cutoff;
   }
   else
   {
      if( node.contains( "categories" ) )
         spec_fail( where + ": categories apply to ordinal indicators only" );
      if( !std::isfinite( cutoff ) )
         spec_fail( where + ": cutoff_z must be finite" );

      ind.direction = Direction::higher_is_better;
      if( node.contains( "direction" ) )
      {
         std::string dir = get_string( node, "direction", where );
         if( dir == "higher-is-better" )
            ind.direction = Direction::higher_is_better;
         else if( dir == "lower-is-better" )
            ind.direction = Direction::lower_is_better;
         else
            spec_fail( where + ": direction must be 'higher-is-better' or "
                               "'lower-is-better'" );
      }
      // Encoded scale is always higher-is-better, so a lower-is-better
      // column is negated on load and the cutoff flips with it.
      ind.cutoff = ind.direction == Direction::lower_is_better ? -cutoff
                                                               : cutoff;
   }
   return ind;
}

bool
parse_double( const std::string& text, double& out )
{
   if( text.empty() )
      return false;
   const char* begin = text.c_str();
   char* end = nullptr;
   out = std::strtod( begin, &end );
   return end == begin + text.size() && std::isfinite( out );
}

bool
is_missing_token( const std::string& cell )
{
   return cell.empty() || cell == "NA";
}

} // namespace

void
normalize_weights( std::vector<IndicatorSpec>& indicators )
{
   StableSum total;
   for( const IndicatorSpec& ind : indicators )
      total.add( ind.weight );
   double sum = total.get();
   if( !( sum > 0.0 ) )
      throw std::runtime_error( "spec: indicator weights sum to zero" );
   for( IndicatorSpec& ind : indicators )
      ind.weight /= sum;
}

ParsedSpec
parse_spec( const std::string& text )
{
   json doc;
   try
   {
      doc = json::parse( text );
   }
   catch( const json::parse_error& e )
   {
      spec_fail( std::string( "invalid JSON: " ) + e.what() );
   }
   if( !doc.is_object() )
      spec_fail( "document root must be an object" );
   check_keys( doc,
               { "indicators", "survey_weight_column", "subgroup_column",
                 "missing_policy" },
               "document" );
   if( !doc.contains( "indicators" ) || !doc["indicators"].is_array() )
      spec_fail( "document needs an 'indicators' array" );

   ParsedSpec spec;
   std::set<std::string> names;
   std::size_t index = 0;
   for( const json& node : doc["indicators"] )
   {
      IndicatorSpec ind = parse_indicator( node, index++ );
      if( !names.insert( ind.name ).second )
         spec_fail( "duplicate indicator name '" + ind.name + "'" );
      spec.indicators.push_back( std::move( ind ) );
   }
   if( spec.indicators.empty() )
      spec_fail( "at least one indicator is required" );

   if( doc.contains( "survey_weight_column" ) )
      spec.survey_weight_column =
          get_string( doc, "survey_weight_column", "document" );
   if( doc.contains( "subgroup_column" ) )
      spec.subgroup_column = get_string( doc, "subgroup_column", "document" );
   if( doc.contains( "missing_policy" ) )
   {
      std::string policy = get_string( doc, "missing_policy", "document" );
      if( policy == "error" )
         spec.missing_policy = MissingPolicy::error;
      else if( policy == "drop-row" )
         spec.missing_policy = MissingPolicy::drop_row;
      else if( policy == "treat-as-most-deprived" )
         spec.missing_policy = MissingPolicy::most_deprived;
      else
         spec_fail( "missing_policy must be 'error', 'drop-row' or "
                    "'treat-as-most-deprived'" );
   }

   normalize_weights( spec.indicators );

   for( const IndicatorSpec& ind : spec.indicators )
      if( ind.is_binary() )
         spec.warnings.push_back(
             "indicator '" + ind.name +
             "': binary indicator; every deprived observation sits at the "
             "observed minimum, so its depth score is constant 1 and the "
             "positional gap adds nothing beyond the deprivation status" );
   return spec;
}

ParsedSpec
parse_spec_file( const std::string& path )
{
   std::ifstream in( path, std::ios::binary );
   if( !in )
      throw std::runtime_error( "spec: cannot open '" + path + "'" );
   std::ostringstream buf;
   buf << in.rdbuf();
   return parse_spec( buf.str() );
}

double
Dataset::total_weight() const
{
   return stable_sum( weight );
}

Dataset
Dataset::subset( const std::vector<std::size_t>& row_ids ) const
{
   Dataset out;
   out.rows = row_ids.size();
   out.cols = cols;
   out.values.reserve( out.rows * cols );
   out.missing.reserve( out.rows * cols );
   out.weight.reserve( out.rows );
   for( std::size_t i : row_ids )
   {
      out.values.insert( out.values.end(), values.begin() + i * cols,
                         values.begin() + ( i + 1 ) * cols );
      out.missing.insert( out.missing.end(), missing.begin() + i * cols,
                          missing.begin() + ( i + 1 ) * cols );
      out.weight.push_back( weight[i] );
      if( has_groups() )
         out.group.push_back( group[i] );
   }
   return out;
}

void
Dataset::validate() const
{
   if( rows == 0 )
      throw std::runtime_error( "dataset: no rows" );
   if( cols == 0 )
      throw std::runtime_error( "dataset: no indicator columns" );
   if( values.size() != rows * cols || missing.size() != rows * cols )
      throw std::runtime_error( "dataset: matrix size mismatch" );
   if( weight.size() != rows )
      throw std::runtime_error( "dataset: weight vector size mismatch" );
   if( !group.empty() && group.size() != rows )
      throw std::runtime_error( "dataset: group vector size mismatch" );
   for( std::size_t i = 0; i < rows; ++i )
   {
      if( !std::isfinite( weight[i] ) || weight[i] <= 0.0 )
         throw std::runtime_error( "dataset: nonpositive weight in row " +
                                   std::to_string( i + 1 ) );
      for( std::size_t j = 0; j < cols; ++j )
         if( !is_missing( i, j ) && !std::isfinite( at( i, j ) ) )
            throw std::runtime_error( "dataset: non-finite value in row " +
                                      std::to_string( i + 1 ) );
   }
}

Dataset
encode_dataset( const csv::Table& table, const ParsedSpec& spec )
{
   const std::size_t d = spec.indicators.size();

   // Resolve source columns up front.
   std::vector<std::size_t> source_col( d );
   std::vector<std::map<std::string, double>> code_of( d );
   for( std::size_t j = 0; j < d; ++j )
   {
      const IndicatorSpec& ind = spec.indicators[j];
      auto col = table.column( ind.source_column );
      if( !col )
         throw std::runtime_error( "data: column '" + ind.source_column +
                                   "' for indicator '" + ind.name +
                                   "' not found" );
      source_col[j] = *col;
      if( ind.kind == IndicatorKind::ordinal )
         for( std::size_t code = 0; code < ind.categories.size(); ++code )
            for( const std::string& label : ind.categories[code].labels )
               code_of[j][label] = double( code );
   }
   std::optional<std::size_t> weight_col;
   if( !spec.survey_weight_column.empty() )
   {
      weight_col = table.column( spec.survey_weight_column );
      if( !weight_col )
         throw std::runtime_error( "data: survey weight column '" +
                                   spec.survey_weight_column + "' not found" );
   }
   std::optional<std::size_t> group_col;
   if( !spec.subgroup_column.empty() )
   {
      group_col = table.column( spec.subgroup_column );
      if( !group_col )
         throw std::runtime_error( "data: subgroup column '" +
                                   spec.subgroup_column + "' not found" );
   }

   // First pass: encode cells, mark missing ones.
   Dataset data;
   data.rows = table.rows.size();
   data.cols = d;
   data.values.assign( data.rows * d, 0.0 );
   data.missing.assign( data.rows * d, 0 );
   data.weight.assign( data.rows, 1.0 );
   if( group_col )
      data.group.assign( data.rows, std::string() );
   if( data.rows == 0 )
      throw std::runtime_error( "data: no data rows" );

   std::vector<std::uint8_t> row_missing( data.rows, 0 );
   for( std::size_t i = 0; i < data.rows; ++i )
   {
      const std::vector<std::string>& row = table.rows[i];
      std::string at_row = "data: row " + std::to_string( i + 1 );
      for( std::size_t j = 0; j < d; ++j )
      {
         const IndicatorSpec& ind = spec.indicators[j];
         const std::string& cell = row[source_col[j]];
         if( is_missing_token( cell ) )
         {
            data.missing[i * d + j] = 1;
            row_missing[i] = 1;
            continue;
         }
         if( ind.kind == IndicatorKind::ordinal )
         {
            auto hit = code_of[j].find( cell );
            if( hit == code_of[j].end() )
               throw std::runtime_error( at_row + ", indicator '" + ind.name +
                                         "': unknown category label '" + cell +
                                         "'" );
            data.at( i, j ) = hit->second;
         }
         else
         {
            double value;
            if( !parse_double( cell, value ) )
               throw std::runtime_error( at_row + ", indicator '" + ind.name +
                                         "': cannot parse '" + cell +
                                         "' as a number" );
            data.at( i, j ) = ind.direction == Direction::lower_is_better
                                  ? -value
                                  : value;
         }
      }
      if( weight_col )
      {
         const std::string& cell = row[*weight_col];
         double w;
         if( is_missing_token( cell ) || !parse_double( cell, w ) ||
             w <= 0.0 )
            throw std::runtime_error(
                at_row + ": survey weight '" + cell +
                "' is not a positive finite number" );
         data.weight[i] = w;
      }
      if( group_col )
      {
         const std::string& cell = row[*group_col];
         if( is_missing_token( cell ) )
         {
            row_missing[i] = 1;
            // Under treat-as-most-deprived, absent labels form their own
            // reporting group rather than silently joining another one.
            data.group[i] = "(missing)";
         }
         else
            data.group[i] = cell;
      }
   }

   // Second pass: resolve masked cells according to the policy.
   switch( spec.missing_policy )
   {
   case MissingPolicy::error:
      for( std::size_t i = 0; i < data.rows; ++i )
      {
         if( !row_missing[i] )
            continue;
         for( std::size_t j = 0; j < d; ++j )
            if( data.is_missing( i, j ) )
               throw std::runtime_error(
                   "data: row " + std::to_string( i + 1 ) + ", indicator '" +
                   spec.indicators[j].name +
                   "': missing value (missing_policy is 'error')" );
         throw std::runtime_error( "data: row " + std::to_string( i + 1 ) +
                                   ": missing subgroup label "
                                   "(missing_policy is 'error')" );
      }
      break;
   case MissingPolicy::drop_row:
   {
      std::vector<std::size_t> kept;
      for( std::size_t i = 0; i < data.rows; ++i )
         if( !row_missing[i] )
            kept.push_back( i );
      if( kept.empty() )
         throw std::runtime_error(
             "data: every row has missing values (missing_policy is "
             "'drop-row')" );
      if( kept.size() < data.rows )
      {
         std::size_t dropped = data.rows - kept.size();
         data = data.subset( kept );
         data.notes.push_back( "dropped " + std::to_string( dropped ) +
                               " row(s) with missing values" );
      }
      break;
   }
   case MissingPolicy::most_deprived:
   {
      // Cardinal columns impute the observed minimum on the encoded scale;
      // ordinal columns impute the worst category (code 0).
      std::vector<double> fill( d, 0.0 );
      for( std::size_t j = 0; j < d; ++j )
      {
         if( spec.indicators[j].kind == IndicatorKind::ordinal )
            continue;
         double min = std::numeric_limits<double>::infinity();
         for( std::size_t i = 0; i < data.rows; ++i )
            if( !data.is_missing( i, j ) )
               min = std::min( min, data.at( i, j ) );
         if( !std::isfinite( min ) )
            throw std::runtime_error(
                "data: indicator '" + spec.indicators[j].name +
                "' has no observed values to impute from" );
         fill[j] = min;
      }
      std::size_t filled = 0;
      for( std::size_t i = 0; i < data.rows; ++i )
         for( std::size_t j = 0; j < d; ++j )
            if( data.is_missing( i, j ) )
            {
               data.at( i, j ) = fill[j];
               data.missing[i * d + j] = 0;
               ++filled;
            }
      if( filled > 0 )
         data.notes.push_back(
             "imputed " + std::to_string( filled ) +
             " missing cell(s) as most deprived" );
      break;
   }
   }

   data.validate();
   return data;
}

Dataset
concatenate( const std::vector<Dataset>& parts )
{
   if( parts.empty() )
      throw std::runtime_error( "dataset: nothing to concatenate" );
   Dataset out;
   out.cols = parts.front().cols;
   bool all_grouped = true;
   for( const Dataset& part : parts )
   {
      if( part.cols != out.cols )
         throw std::runtime_error(
             "dataset: cannot concatenate datasets with different column "
             "counts" );
      all_grouped = all_grouped && part.has_groups();
   }
   for( const Dataset& part : parts )
   {
      out.rows += part.rows;
      out.values.insert( out.values.end(), part.values.begin(),
                         part.values.end() );
      out.missing.insert( out.missing.end(), part.missing.begin(),
                          part.missing.end() );
      out.weight.insert( out.weight.end(), part.weight.begin(),
                         part.weight.end() );
      if( all_grouped )
         out.group.insert( out.group.end(), part.group.begin(),
                           part.group.end() );
      out.notes.insert( out.notes.end(), part.notes.begin(),
                        part.notes.end() );
   }
   out.validate();
   return out;
}

} // namespace ppg
