#include "ppg/reference.hpp"

#include "ppg/stable_sum.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ppg
{

namespace
{

constexpr double kDocTolerance = 1e-12;

[[noreturn]] void
ref_fail( const std::string& what )
{
   throw std::runtime_error( "reference: " + what );
}

std::string
format_double( double v )
{
   char buf[64];
   std::snprintf( buf, sizeof( buf ), "%.17g", v );
   return buf;
}

std::string
iso_utc_now()
{
   // Honor SOURCE_DATE_EPOCH so that rebuilding the same inputs can produce
   // byte-identical reference documents.
   std::time_t t;
   if( const char* epoch = std::getenv( "SOURCE_DATE_EPOCH" ) )
      t = std::time_t( std::strtoll( epoch, nullptr, 10 ) );
   else
      t = std::time( nullptr );
   std::tm tm;
   gmtime_r( &t, &tm );
   char buf[32];
   std::strftime( buf, sizeof( buf ), "%Y-%m-%dT%H:%M:%SZ", &tm );
   return buf;
}

void
fnv1a( std::uint64_t& hash, const void* bytes, std::size_t size )
{
   const unsigned char* p = static_cast<const unsigned char*>( bytes );
   for( std::size_t i = 0; i < size; ++i )
   {
      hash ^= p[i];
      hash *= 0x100000001b3ULL;
   }
}

IndicatorCdf
fit_column( const Dataset& data, const IndicatorSpec& spec, std::size_t j )
{
   // Gather the observed cells.  stable_sort keeps ties in row order, so
   // the cumulative sums below any fixed value are reproduced bit for bit
   // when unrelated cells elsewhere in the column change.
   std::vector<std::pair<double, double>> cell; // (value, weight)
   cell.reserve( data.rows );
   StableSum total; // accumulated in row order, not sorted order
   for( std::size_t i = 0; i < data.rows; ++i )
   {
      if( data.is_missing( i, j ) )
         continue;
      cell.emplace_back( data.at( i, j ), data.weight[i] );
      total.add( data.weight[i] );
   }
   if( cell.empty() )
      ref_fail( "indicator '" + spec.name + "' has no observed values" );
   std::stable_sort( cell.begin(), cell.end(),
                     []( const auto& a, const auto& b )
                     { return a.first < b.first; } );

   IndicatorCdf col;
   col.name = spec.name;
   double w_total = total.get();
   StableSum prefix;
   std::size_t i = 0;
   while( i < cell.size() )
   {
      double value = cell[i].first;
      while( i < cell.size() && cell[i].first == value )
      {
         prefix.add( cell[i].second );
         ++i;
      }
      col.support.push_back( value );
      col.cum_share.push_back( prefix.get() / w_total );
   }
   // The share at the maximum is 1 by definition; force it so the identity
   // holds exactly even when the sorted-order prefix differs from the
   // row-order total in the last bit.
   col.cum_share.back() = 1.0;
   col.min_value = col.support.front();
   col.denom = 1.0 - col.cum_share.front();
   return col;
}

} // namespace

std::string
to_string( RefMode mode )
{
   switch( mode )
   {
   case RefMode::anchored:
      return "anchored";
   case RefMode::in_sample:
      return "in-sample";
   case RefMode::pooled:
      return "pooled";
   }
   return "?";
}

RefMode
ref_mode_from_string( std::string_view name )
{
   if( name == "anchored" )
      return RefMode::anchored;
   if( name == "in-sample" )
      return RefMode::in_sample;
   if( name == "pooled" )
      return RefMode::pooled;
   ref_fail( "unknown reference mode '" + std::string( name ) + "'" );
}

double
IndicatorCdf::cdf( double x ) const
{
   // Index of the last support value <= x; right-continuous step function.
   auto it = std::upper_bound( support.begin(), support.end(), x );
   if( it == support.begin() )
      return 0.0;
   return cum_share[std::size_t( it - support.begin() ) - 1];
}

double
IndicatorCdf::depth_score( double x ) const
{
   if( degenerate() )
      return x <= min_value ? 1.0 : 0.0;
   double s = ( 1.0 - cdf( x ) ) / denom;
   return std::min( 1.0, std::max( 0.0, s ) );
}

const IndicatorCdf*
ReferenceDistribution::find( std::string_view name ) const
{
   for( const IndicatorCdf& col : columns )
      if( col.name == name )
         return &col;
   return nullptr;
}

std::string
dataset_fingerprint( const Dataset& data )
{
   std::uint64_t hash = 0xcbf29ce484222325ULL;
   std::uint64_t dims[2] = { data.rows, data.cols };
   fnv1a( hash, dims, sizeof( dims ) );
   fnv1a( hash, data.values.data(), data.values.size() * sizeof( double ) );
   fnv1a( hash, data.missing.data(), data.missing.size() );
   fnv1a( hash, data.weight.data(), data.weight.size() * sizeof( double ) );
   for( const std::string& g : data.group )
      fnv1a( hash, g.data(), g.size() + 1 );
   char buf[17];
   std::snprintf( buf, sizeof( buf ), "%016llx",
                  static_cast<unsigned long long>( hash ) );
   return buf;
}

ReferenceDistribution
fit_reference( const Dataset& data, const std::vector<IndicatorSpec>& specs,
               RefMode mode )
{
   if( specs.size() != data.cols )
      ref_fail( "indicator count does not match dataset columns" );
   ReferenceDistribution ref;
   ref.mode = mode;
   ref.fingerprint = dataset_fingerprint( data );
   ref.fitted_at = iso_utc_now();
   for( std::size_t j = 0; j < data.cols; ++j )
   {
      ref.columns.push_back( fit_column( data, specs[j], j ) );
      if( ref.columns.back().degenerate() )
         ref.notes.push_back(
             "indicator '" + specs[j].name +
             "': reference mass sits on a single value; depth scores "
             "degenerate to the at-minimum indicator" );
   }
   return ref;
}

ReferenceDistribution
fit_reference_pooled( const std::vector<Dataset>& parts,
                      const std::vector<IndicatorSpec>& specs,
                      PoolingRule rule )
{
   if( parts.size() < 2 )
      ref_fail( "pooled fitting needs at least two datasets" );
   std::vector<Dataset> scaled;
   const std::vector<Dataset>* source = &parts;
   if( rule == PoolingRule::equal_weight )
   {
      scaled = parts;
      for( Dataset& part : scaled )
      {
         double w_total = part.total_weight();
         for( double& w : part.weight )
            w /= w_total;
      }
      source = &scaled;
   }
   return fit_reference( concatenate( *source ), specs, RefMode::pooled );
}

double
cdf_value( const ReferenceDistribution& ref, std::size_t j, double x )
{
   return ref.column( j ).cdf( x );
}

double
positional_depth_score( const ReferenceDistribution& ref, std::size_t j,
                        double x )
{
   return ref.column( j ).depth_score( x );
}

std::string
save_reference( const ReferenceDistribution& ref )
{
   // Hand-rolled writer: nlohmann would re-round doubles, and the loader
   // must see exactly 17 significant digits to reproduce evaluations bit
   // for bit.
   std::ostringstream out;
   out << "{\n";
   out << "  \"format\": \"ppg-reference\",\n";
   out << "  \"version\": 1,\n";
   out << "  \"mode\": \"" << to_string( ref.mode ) << "\",\n";
   out << "  \"fingerprint\": \"" << ref.fingerprint << "\",\n";
   out << "  \"fitted_at\": \"" << ref.fitted_at << "\",\n";
   out << "  \"indicators\": [\n";
   for( std::size_t j = 0; j < ref.columns.size(); ++j )
   {
      const IndicatorCdf& col = ref.columns[j];
      out << "    {\n";
      out << "      \"name\": " << nlohmann::json( col.name ).dump() << ",\n";
      out << "      \"support\": [";
      for( std::size_t i = 0; i < col.support.size(); ++i )
         out << ( i ? ", " : "" ) << format_double( col.support[i] );
      out << "],\n";
      out << "      \"cum_share\": [";
      for( std::size_t i = 0; i < col.cum_share.size(); ++i )
         out << ( i ? ", " : "" ) << format_double( col.cum_share[i] );
      out << "],\n";
      out << "      \"min_value\": " << format_double( col.min_value )
          << ",\n";
      out << "      \"denom\": " << format_double( col.denom ) << "\n";
      out << "    }" << ( j + 1 < ref.columns.size() ? "," : "" ) << "\n";
   }
   out << "  ]\n";
   out << "}\n";
   return out.str();
}

void
save_reference_file( const ReferenceDistribution& ref,
                     const std::string& path )
{
   std::ofstream out( path, std::ios::binary );
   if( !out )
      ref_fail( "cannot write '" + path + "'" );
   out << save_reference( ref );
   if( !out )
      ref_fail( "write to '" + path + "' failed" );
}

ReferenceDistribution
load_reference( const std::string& text )
{
   nlohmann::json doc;
   try
   {
      doc = nlohmann::json::parse( text );
   }
   catch( const nlohmann::json::parse_error& e )
   {
      ref_fail( std::string( "invalid JSON: " ) + e.what() );
   }
   if( !doc.is_object() )
      ref_fail( "document root must be an object" );
   if( !doc.contains( "format" ) || doc["format"] != "ppg-reference" )
      ref_fail( "not a reference document (missing format tag)" );
   if( !doc.contains( "version" ) || doc["version"] != 1 )
      ref_fail( "unsupported document version" );
   if( !doc.contains( "mode" ) || !doc["mode"].is_string() )
      ref_fail( "missing mode" );
   if( !doc.contains( "indicators" ) || !doc["indicators"].is_array() ||
       doc["indicators"].empty() )
      ref_fail( "missing indicators" );

   ReferenceDistribution ref;
   ref.mode = ref_mode_from_string( doc["mode"].get<std::string>() );
   if( doc.contains( "fingerprint" ) && doc["fingerprint"].is_string() )
      ref.fingerprint = doc["fingerprint"].get<std::string>();
   if( doc.contains( "fitted_at" ) && doc["fitted_at"].is_string() )
      ref.fitted_at = doc["fitted_at"].get<std::string>();

   for( const nlohmann::json& node : doc["indicators"] )
   {
      IndicatorCdf col;
      if( !node.is_object() || !node.contains( "name" ) ||
          !node["name"].is_string() || !node.contains( "support" ) ||
          !node["support"].is_array() || !node.contains( "cum_share" ) ||
          !node["cum_share"].is_array() )
         ref_fail( "malformed indicator entry" );
      col.name = node["name"].get<std::string>();
      for( const nlohmann::json& v : node["support"] )
      {
         if( !v.is_number() )
            ref_fail( "indicator '" + col.name + "': non-numeric support" );
         col.support.push_back( v.get<double>() );
      }
      for( const nlohmann::json& v : node["cum_share"] )
      {
         if( !v.is_number() )
            ref_fail( "indicator '" + col.name + "': non-numeric share" );
         col.cum_share.push_back( v.get<double>() );
      }
      if( col.support.empty() ||
          col.support.size() != col.cum_share.size() )
         ref_fail( "indicator '" + col.name +
                   "': support and cum_share lengths differ or are empty" );
      for( std::size_t i = 0; i + 1 < col.support.size(); ++i )
         if( !( col.support[i] < col.support[i + 1] ) )
            ref_fail( "indicator '" + col.name +
                      "': support not strictly ascending" );
      double prev = 0.0;
      for( double share : col.cum_share )
      {
         if( !std::isfinite( share ) || share < prev ||
             share > 1.0 + kDocTolerance )
            ref_fail( "indicator '" + col.name +
                      "': cumulative shares not nondecreasing in [0, 1]" );
         prev = share;
      }
      if( !( col.cum_share.front() > 0.0 ) )
         ref_fail( "indicator '" + col.name +
                   "': the minimum must carry positive mass" );
      if( std::abs( col.cum_share.back() - 1.0 ) > kDocTolerance )
         ref_fail( "indicator '" + col.name +
                   "': cumulative shares must end at 1" );
      col.cum_share.back() = 1.0;

      // Recompute the derived fields so internal identities hold exactly,
      // but refuse documents whose stored values disagree with them.
      if( node.contains( "min_value" ) &&
          ( !node["min_value"].is_number() ||
            node["min_value"].get<double>() != col.support.front() ) )
         ref_fail( "indicator '" + col.name +
                   "': min_value does not match the support minimum" );
      col.min_value = col.support.front();
      double denom = 1.0 - col.cum_share.front();
      if( node.contains( "denom" ) &&
          ( !node["denom"].is_number() ||
            std::abs( node["denom"].get<double>() - denom ) >
                kDocTolerance ) )
         ref_fail( "indicator '" + col.name +
                   "': denom does not match 1 - F(min)" );
      col.denom = denom;

      if( col.degenerate() )
         ref.notes.push_back(
             "indicator '" + col.name +
             "': reference mass sits on a single value; depth scores "
             "degenerate to the at-minimum indicator" );
      ref.columns.push_back( std::move( col ) );
   }
   return ref;
}

ReferenceDistribution
load_reference_file( const std::string& path )
{
   std::ifstream in( path, std::ios::binary );
   if( !in )
      ref_fail( "cannot open '" + path + "'" );
   std::ostringstream buf;
   buf << in.rdbuf();
   return load_reference( buf.str() );
}

} // namespace ppg
