#include "ppg/axiom_lab.hpp"

#include "ppg/stable_sum.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>

namespace ppg::lab
{

namespace
{

/// Equality-style invariances are asserted at this tolerance; compensated
/// summation keeps genuine invariances far below it.
constexpr double kEqTol = 1e-12;
/// Slack for weak inequalities, to absorb refit rounding.
constexpr double kIneqTol = 1e-12;
/// A counterexample must move the index by at least this much.
constexpr double kWitnessMargin = 1e-9;

[[noreturn]] void
lab_fail( const std::string& what )
{
   throw std::runtime_error( "axiom lab: " + what );
}

/// Deterministic generator with rejection-sampled bounded draws.
struct Rng
{
   std::mt19937_64 gen;

   explicit Rng( std::uint64_t seed ) : gen( seed ) {}

   std::uint64_t
   raw()
   {
      return gen();
   }

   int
   below( int n )
   {
      auto bound = std::uint64_t( n );
      std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
      std::uint64_t r;
      do
         r = gen();
      while( r >= limit );
      return int( r % bound );
   }

   double
   uniform()
   {
      return double( gen() >> 11 ) * 0x1.0p-53;
   }
};

std::uint64_t
cell_seed( std::uint64_t seed, Axiom a, RefPolicy mode )
{
   std::uint64_t h = seed ^ 0x9e3779b97f4a7c15ULL;
   h ^= std::uint64_t( a ) + 0x100 * std::uint64_t( mode );
   h *= 0x100000001b3ULL;
   return h;
}

// ---------------------------------------------------------------------
// Instance plumbing

Instance
permute_rows( const Instance& inst, std::span<const std::size_t> perm )
{
   Instance out = inst;
   for( std::size_t i = 0; i < inst.rows; ++i )
   {
      std::size_t from = perm[i];
      for( std::size_t j = 0; j < inst.cols; ++j )
         out.values[i * inst.cols + j] = inst.values[from * inst.cols + j];
      out.survey_weight[i] = inst.survey_weight[from];
      if( !inst.group.empty() )
         out.group[i] = inst.group[from];
   }
   return out;
}

Instance
permute_columns( const Instance& inst, std::span<const std::size_t> perm )
{
   Instance out = inst;
   for( std::size_t j = 0; j < inst.cols; ++j )
   {
      std::size_t from = perm[j];
      out.scale[j] = inst.scale[from];
      out.cutoff[j] = inst.cutoff[from];
      out.indicator_weight[j] = inst.indicator_weight[from];
      for( std::size_t i = 0; i < inst.rows; ++i )
         out.values[i * inst.cols + j] = inst.values[i * inst.cols + from];
   }
   return out;
}

Instance
replicate( const Instance& inst, int times )
{
   Instance out = inst;
   out.rows = inst.rows * std::size_t( times );
   out.values.clear();
   out.survey_weight.clear();
   out.group.clear();
   for( int t = 0; t < times; ++t )
   {
      out.values.insert( out.values.end(), inst.values.begin(),
                         inst.values.end() );
      out.survey_weight.insert( out.survey_weight.end(),
                                inst.survey_weight.begin(),
                                inst.survey_weight.end() );
      out.group.insert( out.group.end(), inst.group.begin(),
                        inst.group.end() );
   }
   return out;
}

Instance
recode_column( const Instance& inst, std::size_t j,
               std::span<const int> code_map, int new_scale )
{
   Instance out = inst;
   out.scale[j] = new_scale;
   out.cutoff[j] = code_map[std::size_t( inst.cutoff[j] )];
   for( std::size_t i = 0; i < inst.rows; ++i )
      out.at( i, j ) = code_map[std::size_t( inst.at( i, j ) )];
   return out;
}

Instance
drop_row( const Instance& inst, std::size_t victim )
{
   Instance out = inst;
   out.rows = inst.rows - 1;
   out.values.clear();
   out.survey_weight.clear();
   out.group.clear();
   for( std::size_t i = 0; i < inst.rows; ++i )
   {
      if( i == victim )
         continue;
      for( std::size_t j = 0; j < inst.cols; ++j )
         out.values.push_back( inst.at( i, j ) );
      out.survey_weight.push_back( inst.survey_weight[i] );
      if( !inst.group.empty() )
         out.group.push_back( inst.group[i] );
   }
   return out;
}

// ---------------------------------------------------------------------
// Evaluation on the real library path

/// The adjusted index straight off a profile.  Bit-identical to the
/// measures-module aggregation; the lab keeps a lean copy to stay cheap in
/// tight enumeration loops, and a unit test pins the equivalence.  With
/// `skip_censoring` the deprivation-status mask is ignored, which is the
/// injected defect the lab must be able to detect in itself.
double
index_of( const DeprivationProfile& prof, double alpha, bool skip_censoring )
{
   StableSum total;
   for( std::size_t i = 0; i < prof.rows; ++i )
   {
      double degree = 0.0;
      if( prof.poor[i] )
      {
         for( std::size_t j = 0; j < prof.cols; ++j )
         {
            std::size_t cell = i * prof.cols + j;
            double s;
            if( skip_censoring )
               s = prof.depth[cell];
            else if( prof.deprived_censored[cell] )
               s = prof.depth_censored[cell];
            else
               continue;
            degree += prof.indicator_weight[j] *
                      ( alpha == 1.0 ? s : std::pow( s, alpha ) );
         }
      }
      total.add( prof.weight[i] * degree );
   }
   return total.get() / prof.weighted_total;
}

/// Per-person degree of poverty from a profile row.
double
degree_of( const DeprivationProfile& prof, std::size_t i )
{
   double degree = 0.0;
   for( std::size_t j = 0; j < prof.cols; ++j )
   {
      std::size_t cell = i * prof.cols + j;
      if( prof.deprived_censored[cell] )
         degree += prof.indicator_weight[j] * prof.depth_censored[cell];
   }
   return degree;
}

struct BaseEval
{
   std::vector<IndicatorSpec> specs;
   Dataset data;
   ReferenceDistribution ref; // fitted on the unperturbed instance
   DeprivationProfile prof;
   double p = 0.0;
};

BaseEval
eval_base( const Instance& inst, double alpha, bool skip_censoring )
{
   BaseEval base;
   base.specs = instance_specs( inst );
   base.data = instance_dataset( inst );
   base.ref = fit_reference( base.data, base.specs, RefMode::in_sample );
   base.prof =
       build_profile( base.data, base.specs, base.ref, inst.poverty_cutoff );
   base.p = index_of( base.prof, alpha, skip_censoring );
   return base;
}

DeprivationProfile
pert_profile( RefPolicy mode, const BaseEval& base, const Instance& pert )
{
   Dataset data = instance_dataset( pert );
   if( mode == RefPolicy::anchored )
      return build_profile( data, base.specs, base.ref,
                            pert.poverty_cutoff );
   ReferenceDistribution ref =
       fit_reference( data, base.specs, RefMode::in_sample );
   return build_profile( data, base.specs, ref, pert.poverty_cutoff );
}

double
eval_pert( RefPolicy mode, const BaseEval& base, const Instance& pert,
           double alpha, bool skip_censoring )
{
   return index_of( pert_profile( mode, base, pert ), alpha,
                    skip_censoring );
}

/// Full standalone evaluation (own specs, own fit) for perturbations that
/// rewrite the indicator layout, such as recodings and column relabelings.
double
eval_standalone( const Instance& inst, double alpha, bool skip_censoring )
{
   return eval_base( inst, alpha, skip_censoring ).p;
}

/// Evaluate the index over one subgroup of an instance against a given
/// reference; also reports the subgroup's weight share.
double
eval_rows_with( const BaseEval& base, const std::vector<std::size_t>& rows,
                const ReferenceDistribution& ref, double poverty_cutoff,
                double alpha, double* weight_share )
{
   Dataset sub = base.data.subset( rows );
   DeprivationProfile prof =
       build_profile( sub, base.specs, ref, poverty_cutoff );
   if( weight_share )
      *weight_share = prof.weighted_total / base.prof.weighted_total;
   return index_of( prof, alpha, false );
}

double
eval_rows_insample( const BaseEval& base,
                    const std::vector<std::size_t>& rows,
                    double poverty_cutoff, double alpha )
{
   Dataset sub = base.data.subset( rows );
   ReferenceDistribution ref =
       fit_reference( sub, base.specs, RefMode::in_sample );
   DeprivationProfile prof =
       build_profile( sub, base.specs, ref, poverty_cutoff );
   return index_of( prof, alpha, false );
}

std::vector<std::size_t>
rows_of_group( const Instance& inst, int g )
{
   std::vector<std::size_t> rows;
   for( std::size_t i = 0; i < inst.rows; ++i )
      if( inst.group[i] == g )
         rows.push_back( i );
   return rows;
}

// ---------------------------------------------------------------------
// Exhaustive instance enumeration

std::vector<double>
poverty_cutoff_grid( const Instance& inst )
{
   std::vector<IndicatorSpec> specs = instance_specs( inst );
   double uni = union_cutoff( specs );
   std::vector<double> grid{ uni };
   double mid = ( uni + 1.0 ) / 2.0;
   if( mid > uni && mid < 1.0 )
      grid.push_back( mid );
   if( uni < 1.0 )
      grid.push_back( 1.0 );
   return grid;
}

/// Visit every instance with rows <= max_rows, cols <= max_cols, every
/// per-column scale in 2..max_scale, every admissible integer cutoff, every
/// value matrix, unit survey weights, equal indicator weights (plus a 1:2
/// split for two columns so intermediate identification genuinely differs
/// from union and intersection), and every poverty cutoff from the small
/// grid.  The visitor may mutate nothing; instances are rebuilt in place.
template <typename F>
void
for_each_exhaustive( const LabOptions& opt, F&& visit )
{
   for( std::size_t d = 1; d <= opt.exhaustive_cols; ++d )
   {
      std::vector<int> scales( d, 2 );
      while( true )
      {
         // weight schemes: equal always; a 1:2 split for d == 2
         std::size_t weight_options = d == 2 ? 2 : 1;
         for( std::size_t wopt = 0; wopt < weight_options; ++wopt )
         {
            std::vector<double> weights( d, 1.0 );
            if( wopt == 1 )
               weights = { 1.0, 2.0 };
            {
               StableSum sum;
               for( double w : weights )
                  sum.add( w );
               for( double& w : weights )
                  w /= sum.get();
            }
            std::vector<int> cutoff( d, 1 );
            while( true )
            {
               for( std::size_t n = 1; n <= opt.exhaustive_rows; ++n )
               {
                  Instance inst;
                  inst.rows = n;
                  inst.cols = d;
                  inst.scale = scales;
                  inst.cutoff = cutoff;
                  inst.indicator_weight = weights;
                  inst.survey_weight.assign( n, 1.0 );
                  inst.values.assign( n * d, 0 );
                  while( true )
                  {
                     for( double k : poverty_cutoff_grid( inst ) )
                     {
                        inst.poverty_cutoff = k;
                        visit( inst );
                     }
                     // odometer over the value matrix
                     std::size_t cell = 0;
                     for( ; cell < n * d; ++cell )
                     {
                        if( ++inst.values[cell] < inst.scale[cell % d] )
                           break;
                        inst.values[cell] = 0;
                     }
                     if( cell == n * d )
                        break;
                  }
               }
               std::size_t j = 0;
               for( ; j < d; ++j )
               {
                  if( ++cutoff[j] <= scales[j] - 1 )
                     break;
                  cutoff[j] = 1;
               }
               if( j == d )
                  break;
            }
         }
         std::size_t j = 0;
         for( ; j < d; ++j )
         {
            if( ++scales[j] <= opt.exhaustive_scale )
               break;
            scales[j] = 2;
         }
         if( j == d )
            break;
      }
   }
}

/// Visit every set partition of {0..n-1} into at least two parts, encoded
/// as a label vector with labels 0..parts-1.
template <typename F>
void
for_each_partition( std::size_t n, F&& visit )
{
   std::vector<int> label( n, 0 );
   auto recurse = [&]( auto&& self, std::size_t i, int used ) -> void
   {
      if( i == n )
      {
         if( used >= 2 )
            visit( label, used );
         return;
      }
      for( int g = 0; g <= used; ++g )
      {
         label[i] = g;
         self( self, i + 1, g == used ? used + 1 : used );
      }
   };
   recurse( recurse, 0, 0 );
}

// ---------------------------------------------------------------------
// Random instances

Instance
random_instance( Rng& rng, bool unit_weights, std::size_t max_rows = 24,
                 std::size_t max_cols = 4 )
{
   std::size_t n = 2 + std::size_t( rng.below( int( max_rows - 1 ) ) );
   std::size_t d = 1 + std::size_t( rng.below( int( max_cols ) ) );
   std::vector<int> scales( d );
   for( int& s : scales )
      s = 2 + rng.below( 4 );
   Instance inst = gen_matrix( rng.raw(), n, d, scales,
                               unit_weights ? WeightScheme::unit
                                            : WeightScheme::random_weights );
   std::vector<double> grid =
       poverty_cutoff_grid( inst );
   inst.poverty_cutoff = grid[std::size_t( rng.below( int( grid.size() ) ) )];
   return inst;
}

// ---------------------------------------------------------------------
// Violation bookkeeping

struct CheckContext
{
   RefPolicy mode = RefPolicy::in_sample;
   double alpha = 1.0;
   bool skip_censoring = false;
   bool exhaustive = true;
   CheckResult* result = nullptr;

   void
   count()
   {
      if( exhaustive )
         ++result->exhaustive_cases;
      else
         ++result->random_cases;
   }

   void
   violation( const Instance& base, const Instance& pert, double p0,
              double p1, const std::string& note )
   {
      ++result->violations;
      if( result->witnesses.empty() )
      {
         Witness w;
         w.base = base;
         w.perturbed = pert;
         w.mode = mode;
         w.p_base = p0;
         w.p_perturbed = p1;
         w.note = note;
         result->witnesses.push_back( std::move( w ) );
      }
   }
};

// ---------------------------------------------------------------------
// Expected-holds protocols, one per axiom

void
check_symmetry( CheckContext& ctx, const Instance& inst, Rng* rng )
{
   BaseEval base = eval_base( inst, ctx.alpha, ctx.skip_censoring );
   auto assert_same = [&]( const Instance& pert, double p1,
                           const char* what )
   {
      ctx.count();
      if( std::abs( p1 - base.p ) > kEqTol )
         ctx.violation( inst, pert, base.p, p1, what );
   };

   if( rng )
   {
      std::vector<std::size_t> perm( inst.rows );
      std::iota( perm.begin(), perm.end(), 0 );
      for( std::size_t i = inst.rows; i > 1; --i )
         std::swap( perm[i - 1], perm[std::size_t( rng->below( int( i ) ) )] );
      Instance pert = permute_rows( inst, perm );
      assert_same( pert, eval_pert( ctx.mode, base, pert, ctx.alpha,
                                    ctx.skip_censoring ),
                   "row relabeling changed the index" );
      if( inst.cols > 1 )
      {
         std::vector<std::size_t> cperm( inst.cols );
         std::iota( cperm.begin(), cperm.end(), 0 );
         for( std::size_t j = inst.cols; j > 1; --j )
            std::swap( cperm[j - 1],
                       cperm[std::size_t( rng->below( int( j ) ) )] );
         Instance pert2 = permute_columns( inst, cperm );
         assert_same( pert2,
                      eval_standalone( pert2, ctx.alpha, ctx.skip_censoring ),
                      "indicator relabeling changed the index" );
      }
      return;
   }

   std::vector<std::size_t> perm( inst.rows );
   std::iota( perm.begin(), perm.end(), 0 );
   while( std::next_permutation( perm.begin(), perm.end() ) )
   {
      Instance pert = permute_rows( inst, perm );
      assert_same( pert, eval_pert( ctx.mode, base, pert, ctx.alpha,
                                    ctx.skip_censoring ),
                   "row relabeling changed the index" );
   }
   if( inst.cols == 2 )
   {
      std::vector<std::size_t> cperm{ 1, 0 };
      Instance pert = permute_columns( inst, cperm );
      assert_same( pert,
                   eval_standalone( pert, ctx.alpha, ctx.skip_censoring ),
                   "indicator relabeling changed the index" );
   }
}

void
check_replication( CheckContext& ctx, const Instance& inst, Rng* rng )
{
   BaseEval base = eval_base( inst, ctx.alpha, ctx.skip_censoring );
   int times = rng ? 2 + rng->below( 2 ) : 2;
   Instance pert = replicate( inst, times );
   double p1 = eval_pert( ctx.mode, base, pert, ctx.alpha,
                          ctx.skip_censoring );
   ctx.count();
   if( std::abs( p1 - base.p ) > kEqTol )
      ctx.violation( inst, pert, base.p, p1,
                     "replicating the population changed the index" );
}

void
check_bounds( CheckContext& ctx, const Instance& inst )
{
   BaseEval base = eval_base( inst, ctx.alpha, ctx.skip_censoring );
   ctx.count();
   if( base.p < -kEqTol || base.p > 1.0 + kEqTol )
      ctx.violation( inst, inst, base.p, base.p,
                     "index left the unit interval" );
}

void
check_ordinal_invariance( CheckContext& ctx, const Instance& inst, Rng* rng )
{
   BaseEval base = eval_base( inst, ctx.alpha, ctx.skip_censoring );
   auto assert_same = [&]( const Instance& pert )
   {
      double p1 = eval_standalone( pert, ctx.alpha, ctx.skip_censoring );
      ctx.count();
      if( std::abs( p1 - base.p ) > kEqTol )
         ctx.violation( inst, pert, base.p, p1,
                        "monotone recoding changed the index" );
   };

   if( rng )
   {
      auto j = std::size_t( rng->below( int( inst.cols ) ) );
      int s = inst.scale[j];
      int span = s + 4;
      // strictly increasing draw of s codes out of 0..span-1
      std::vector<int> pool( static_cast<std::size_t>( span ) );
      std::iota( pool.begin(), pool.end(), 0 );
      for( int i = 0; i < s; ++i )
      {
         int pick = i + rng->below( span - i );
         std::swap( pool[std::size_t( i )], pool[std::size_t( pick )] );
      }
      std::vector<int> code_map( pool.begin(), pool.begin() + s );
      std::sort( code_map.begin(), code_map.end() );
      assert_same( recode_column( inst, j, code_map, span ) );
      return;
   }

   for( std::size_t j = 0; j < inst.cols; ++j )
   {
      int s = inst.scale[j];
      // all strictly increasing maps {0..s-1} -> {0..s}: drop one code
      for( int dropped = 0; dropped < s; ++dropped )
      {
         std::vector<int> code_map;
         for( int code = 0; code <= s; ++code )
            if( code != dropped )
               code_map.push_back( code );
         assert_same( recode_column( inst, j, code_map, s + 1 ) );
      }
   }
}

void
check_deprivation_focus( CheckContext& ctx, const Instance& inst, Rng* rng )
{
   BaseEval base = eval_base( inst, ctx.alpha, ctx.skip_censoring );
   auto try_cell = [&]( std::size_t i, std::size_t j, int to )
   {
      Instance pert = inst;
      pert.at( i, j ) = to;
      double p1 = eval_pert( ctx.mode, base, pert, ctx.alpha,
                             ctx.skip_censoring );
      ctx.count();
      // Improvements above the deprivation cutoff are censored away, so the
      // index must not move at all, not even in the last bit.
      if( p1 != base.p )
         ctx.violation( inst, pert, base.p, p1,
                        "improving a non-deprived cell moved the index" );
   };

   if( rng )
   {
      std::vector<std::pair<std::size_t, std::size_t>> cells;
      for( std::size_t i = 0; i < inst.rows; ++i )
         for( std::size_t j = 0; j < inst.cols; ++j )
            if( inst.at( i, j ) >= inst.cutoff[j] &&
                inst.at( i, j ) + 1 < inst.scale[j] )
               cells.emplace_back( i, j );
      if( cells.empty() )
         return;
      auto [i, j] = cells[std::size_t( rng->below( int( cells.size() ) ) )];
      int to = inst.at( i, j ) + 1 +
               rng->below( inst.scale[j] - inst.at( i, j ) - 1 );
      try_cell( i, j, to );
      return;
   }

   for( std::size_t i = 0; i < inst.rows; ++i )
      for( std::size_t j = 0; j < inst.cols; ++j )
      {
         int x = inst.at( i, j );
         if( x < inst.cutoff[j] )
            continue;
         for( int to = x + 1; to < inst.scale[j]; ++to )
            try_cell( i, j, to );
      }
}

/// Weighted deprivation share of a hypothetical row, against the instance's
/// cutoffs and weights.
double
row_score( const Instance& inst, std::span<const int> row )
{
   double c = 0.0;
   for( std::size_t j = 0; j < inst.cols; ++j )
      if( row[j] < inst.cutoff[j] )
         c += inst.indicator_weight[j];
   return c;
}

void
check_poverty_focus_holds( CheckContext& ctx, const Instance& inst,
                           Rng* rng )
{
   BaseEval base = eval_base( inst, ctx.alpha, ctx.skip_censoring );
   std::vector<std::size_t> non_poor;
   for( std::size_t i = 0; i < inst.rows; ++i )
      if( !base.prof.poor[i] )
         non_poor.push_back( i );
   if( non_poor.empty() )
      return;

   auto try_row = [&]( std::size_t i, std::span<const int> row )
   {
      Instance pert = inst;
      for( std::size_t j = 0; j < inst.cols; ++j )
         pert.at( i, j ) = row[j];
      double p1 = eval_pert( ctx.mode, base, pert, ctx.alpha,
                             ctx.skip_censoring );
      ctx.count();
      if( p1 != base.p )
         ctx.violation( inst, pert, base.p, p1,
                        "rewriting a non-poor row moved the index" );
   };

   if( rng )
   {
      std::size_t i =
          non_poor[std::size_t( rng->below( int( non_poor.size() ) ) )];
      std::vector<int> row( inst.cols );
      for( int attempt = 0; attempt < 40; ++attempt )
      {
         bool changed = false;
         for( std::size_t j = 0; j < inst.cols; ++j )
         {
            row[j] = rng->below( inst.scale[j] );
            changed = changed || row[j] != inst.at( i, j );
         }
         if( changed && !reaches_cutoff( row_score( inst, row ),
                                         inst.poverty_cutoff ) )
         {
            try_row( i, row );
            return;
         }
      }
      return;
   }

   for( std::size_t i : non_poor )
   {
      std::vector<int> row( inst.cols, 0 );
      while( true )
      {
         bool same = true;
         for( std::size_t j = 0; j < inst.cols && same; ++j )
            same = row[j] == inst.at( i, j );
         if( !same && !reaches_cutoff( row_score( inst, row ),
                                       inst.poverty_cutoff ) )
            try_row( i, row );
         std::size_t j = 0;
         for( ; j < inst.cols; ++j )
         {
            if( ++row[j] < inst.scale[j] )
               break;
            row[j] = 0;
         }
         if( j == inst.cols )
            break;
      }
   }
}

void
check_own_monotonicity( CheckContext& ctx, const Instance& inst, Rng* rng )
{
   BaseEval base = eval_base( inst, ctx.alpha, ctx.skip_censoring );
   auto try_cell = [&]( std::size_t i, std::size_t j, int to )
   {
      Instance pert = inst;
      pert.at( i, j ) = to;
      DeprivationProfile prof = pert_profile( ctx.mode, base, pert );
      std::size_t cell = i * inst.cols + j;
      double s0 = base.prof.depth[cell];
      double s1 = prof.depth[cell];
      double d0 = degree_of( base.prof, i );
      double d1 = degree_of( prof, i );
      ctx.count();
      if( s1 < s0 - kIneqTol || d1 < d0 - kIneqTol )
         ctx.violation( inst, pert, d0, d1,
                        "a worsening lowered the person's own depth score "
                        "or degree of poverty" );
   };

   if( rng )
   {
      std::vector<std::pair<std::size_t, std::size_t>> cells;
      for( std::size_t i = 0; i < inst.rows; ++i )
         for( std::size_t j = 0; j < inst.cols; ++j )
            if( inst.at( i, j ) > 0 && inst.at( i, j ) < inst.cutoff[j] )
               cells.emplace_back( i, j );
      if( cells.empty() )
         return;
      auto [i, j] = cells[std::size_t( rng->below( int( cells.size() ) ) )];
      try_cell( i, j, rng->below( inst.at( i, j ) ) );
      return;
   }

   for( std::size_t i = 0; i < inst.rows; ++i )
      for( std::size_t j = 0; j < inst.cols; ++j )
      {
         int x = inst.at( i, j );
         if( x >= inst.cutoff[j] )
            continue;
         for( int to = 0; to < x; ++to )
            try_cell( i, j, to );
      }
}

void
check_aggregate_monotonicity_holds( CheckContext& ctx, const Instance& inst,
                                    Rng* rng )
{
   BaseEval base = eval_base( inst, ctx.alpha, ctx.skip_censoring );
   auto try_cell = [&]( std::size_t i, std::size_t j, int to )
   {
      Instance pert = inst;
      pert.at( i, j ) = to;
      double p1 = eval_pert( ctx.mode, base, pert, ctx.alpha,
                             ctx.skip_censoring );
      ctx.count();
      if( p1 < base.p - kIneqTol )
         ctx.violation( inst, pert, base.p, p1,
                        "a worsening lowered the index" );
   };

   if( rng )
   {
      std::vector<std::pair<std::size_t, std::size_t>> cells;
      for( std::size_t i = 0; i < inst.rows; ++i )
         for( std::size_t j = 0; j < inst.cols; ++j )
            if( inst.at( i, j ) > 0 )
               cells.emplace_back( i, j );
      if( cells.empty() )
         return;
      auto [i, j] = cells[std::size_t( rng->below( int( cells.size() ) ) )];
      try_cell( i, j, rng->below( inst.at( i, j ) ) );
      return;
   }

   for( std::size_t i = 0; i < inst.rows; ++i )
      for( std::size_t j = 0; j < inst.cols; ++j )
         for( int to = 0; to < inst.at( i, j ); ++to )
            try_cell( i, j, to );
}

void
check_dimensional_monotonicity_holds( CheckContext& ctx,
                                      const Instance& inst, Rng* rng )
{
   BaseEval base = eval_base( inst, ctx.alpha, ctx.skip_censoring );
   auto try_cell = [&]( std::size_t i, std::size_t j, int to )
   {
      Instance pert = inst;
      pert.at( i, j ) = to;
      DeprivationProfile prof = pert_profile( ctx.mode, base, pert );
      double p1 = index_of( prof, ctx.alpha, ctx.skip_censoring );
      std::size_t cell = i * inst.cols + j;
      ctx.count();
      bool strict_expected =
          prof.poor[i] && prof.depth[cell] > 1e-9;
      if( p1 < base.p - kIneqTol ||
          ( strict_expected && !( p1 > base.p ) ) )
         ctx.violation( inst, pert, base.p, p1,
                        "an added deprivation failed to raise the index" );
   };

   if( rng )
   {
      std::vector<std::pair<std::size_t, std::size_t>> cells;
      for( std::size_t i = 0; i < inst.rows; ++i )
         for( std::size_t j = 0; j < inst.cols; ++j )
            if( inst.at( i, j ) >= inst.cutoff[j] )
               cells.emplace_back( i, j );
      if( cells.empty() )
         return;
      auto [i, j] = cells[std::size_t( rng->below( int( cells.size() ) ) )];
      try_cell( i, j, rng->below( inst.cutoff[j] ) );
      return;
   }

   for( std::size_t i = 0; i < inst.rows; ++i )
      for( std::size_t j = 0; j < inst.cols; ++j )
      {
         if( inst.at( i, j ) < inst.cutoff[j] )
            continue;
         for( int to = 0; to < inst.cutoff[j]; ++to )
            try_cell( i, j, to );
      }
}

void
check_decomposability_holds( CheckContext& ctx, const Instance& inst,
                             Rng* rng )
{
   if( inst.rows < 2 )
      return;
   BaseEval base = eval_base( inst, ctx.alpha, ctx.skip_censoring );
   auto try_partition = [&]( const std::vector<int>& label, int parts )
   {
      StableSum reconstructed;
      for( int g = 0; g < parts; ++g )
      {
         std::vector<std::size_t> rows;
         for( std::size_t i = 0; i < inst.rows; ++i )
            if( label[i] == g )
               rows.push_back( i );
         double share = 0.0;
         double part = eval_rows_with( base, rows, base.ref,
                                       inst.poverty_cutoff, ctx.alpha,
                                       &share );
         reconstructed.add( share * part );
      }
      ctx.count();
      double sum = reconstructed.get();
      if( std::abs( sum - base.p ) > kEqTol )
         ctx.violation( inst, inst, base.p, sum,
                        "population-share weighted subgroup values did not "
                        "reconstruct the index" );
   };

   if( rng )
   {
      int parts = 2 + rng->below( int( std::min<std::size_t>(
                          3, inst.rows ) - 1 ) );
      std::vector<int> label( inst.rows );
      // ensure every part is hit at least once
      for( int g = 0; g < parts; ++g )
         label[std::size_t( g )] = g;
      for( std::size_t i = std::size_t( parts ); i < inst.rows; ++i )
         label[i] = rng->below( parts );
      for( std::size_t i = inst.rows; i > 1; --i )
         std::swap( label[i - 1], label[std::size_t( rng->below( int( i ) ) )] );
      try_partition( label, parts );
      return;
   }

   for_each_partition( inst.rows, try_partition );
}

void
check_subgroup_consistency_holds( CheckContext& ctx, const Instance& inst,
                                  Rng* rng )
{
   if( inst.rows < 2 )
      return;
   BaseEval base = eval_base( inst, ctx.alpha, ctx.skip_censoring );

   // Within-subgroup changes must move the total exactly by the subgroup's
   // weighted share of its own change (all against the frozen reference).
   // Single-person subgroups span the general case: the decomposability
   // identity, certified exhaustively above, telescopes any multi-person
   // change into per-person ones.
   auto try_change = [&]( const std::vector<std::size_t>& sub,
                          std::size_t i, std::size_t j, int to )
   {
      Instance pert = inst;
      pert.at( i, j ) = to;
      double share = 0.0;
      double part0 = eval_rows_with( base, sub, base.ref,
                                     inst.poverty_cutoff, ctx.alpha,
                                     &share );
      Dataset pert_data = instance_dataset( pert );
      DeprivationProfile pert_prof = build_profile(
          pert_data, base.specs, base.ref, inst.poverty_cutoff );
      double p1 = index_of( pert_prof, ctx.alpha, ctx.skip_censoring );
      Dataset pert_sub = pert_data.subset( sub );
      DeprivationProfile sub_prof = build_profile(
          pert_sub, base.specs, base.ref, inst.poverty_cutoff );
      double part1 = index_of( sub_prof, ctx.alpha, ctx.skip_censoring );
      ctx.count();
      double lhs = p1 - base.p;
      double rhs = share * ( part1 - part0 );
      if( std::abs( lhs - rhs ) > kEqTol )
         ctx.violation( inst, pert, base.p, p1,
                        "a within-subgroup change moved the total by a "
                        "different amount than the subgroup's share" );
   };

   if( rng )
   {
      auto i = std::size_t( rng->below( int( inst.rows ) ) );
      auto j = std::size_t( rng->below( int( inst.cols ) ) );
      int to = rng->below( inst.scale[j] );
      if( to == inst.at( i, j ) )
         return;
      // a random subgroup containing person i
      std::vector<std::size_t> sub{ i };
      for( std::size_t r = 0; r < inst.rows; ++r )
         if( r != i && rng->below( 2 ) == 1 )
            sub.push_back( r );
      std::sort( sub.begin(), sub.end() );
      try_change( sub, i, j, to );
      return;
   }

   for( std::size_t i = 0; i < inst.rows; ++i )
      for( std::size_t j = 0; j < inst.cols; ++j )
         for( int dir : { -1, 1 } )
         {
            int to = inst.at( i, j ) + dir;
            if( to < 0 || to >= inst.scale[j] )
               continue;
            try_change( { i }, i, j, to );
         }
}

void
check_weak_rearrangement_holds( CheckContext& ctx, const Instance& inst,
                                Rng* rng )
{
   BaseEval base = eval_base( inst, ctx.alpha, ctx.skip_censoring );
   auto try_cell = [&]( std::size_t i, std::size_t j, int to )
   {
      Instance pert = inst;
      pert.at( i, j ) = to;
      double p1 = eval_pert( ctx.mode, base, pert, ctx.alpha,
                             ctx.skip_censoring );
      ctx.count();
      if( p1 > base.p + kIneqTol )
         ctx.violation( inst, pert, base.p, p1,
                        "replacing a deeper deprivation with a shallower "
                        "one raised the index" );
   };

   if( rng )
   {
      std::vector<std::pair<std::size_t, std::size_t>> cells;
      for( std::size_t i = 0; i < inst.rows; ++i )
      {
         if( !base.prof.poor[i] )
            continue;
         for( std::size_t j = 0; j < inst.cols; ++j )
            if( inst.at( i, j ) + 1 < inst.cutoff[j] )
               cells.emplace_back( i, j );
      }
      if( cells.empty() )
         return;
      auto [i, j] = cells[std::size_t( rng->below( int( cells.size() ) ) )];
      int x = inst.at( i, j );
      try_cell( i, j, x + 1 + rng->below( inst.cutoff[j] - x - 1 ) );
      return;
   }

   for( std::size_t i = 0; i < inst.rows; ++i )
   {
      if( !base.prof.poor[i] )
         continue;
      for( std::size_t j = 0; j < inst.cols; ++j )
      {
         int x = inst.at( i, j );
         if( x >= inst.cutoff[j] )
            continue;
         for( int to = x + 1; to < inst.cutoff[j]; ++to )
            try_cell( i, j, to );
      }
   }
}

void
check_one_holds( Axiom a, CheckContext& ctx, const Instance& inst, Rng* rng )
{
   switch( a )
   {
   case Axiom::symmetry:
      check_symmetry( ctx, inst, rng );
      break;
   case Axiom::replication_invariance:
      check_replication( ctx, inst, rng );
      break;
   case Axiom::bounds:
      check_bounds( ctx, inst );
      break;
   case Axiom::ordinal_invariance:
      check_ordinal_invariance( ctx, inst, rng );
      break;
   case Axiom::deprivation_focus:
      check_deprivation_focus( ctx, inst, rng );
      break;
   case Axiom::poverty_focus:
      check_poverty_focus_holds( ctx, inst, rng );
      break;
   case Axiom::own_monotonicity:
      check_own_monotonicity( ctx, inst, rng );
      break;
   case Axiom::aggregate_monotonicity:
      check_aggregate_monotonicity_holds( ctx, inst, rng );
      break;
   case Axiom::dimensional_monotonicity:
      check_dimensional_monotonicity_holds( ctx, inst, rng );
      break;
   case Axiom::decomposability:
      check_decomposability_holds( ctx, inst, rng );
      break;
   case Axiom::subgroup_consistency:
      check_subgroup_consistency_holds( ctx, inst, rng );
      break;
   case Axiom::weak_rearrangement:
      check_weak_rearrangement_holds( ctx, inst, rng );
      break;
   case Axiom::weak_transfer:
      lab_fail( "weak transfer has no expected-holds protocol" );
   }
}

// ---------------------------------------------------------------------
// Expected-fail protocols: probes, search, shrinking

struct Candidate
{
   Instance base;
   Instance perturbed;
   std::string note;
   /// rows that the perturbation touches and shrinking must keep
   std::vector<std::size_t> pinned_rows;
};

/// Numbers behind a violation decision, so witnesses can re-verify.
struct ViolationNumbers
{
   double p_base = 0.0;
   double p_perturbed = 0.0;
};

/// Decide whether a candidate actually violates the axiom under the mode,
/// on the real evaluation path.  Returns the two index values when it does.
std::optional<ViolationNumbers>
violation_numbers( Axiom a, RefPolicy mode, const Instance& base,
                   const Instance& pert )
{
   BaseEval b = eval_base( base, 1.0, false );
   switch( a )
   {
   case Axiom::poverty_focus:
   {
      double p1 = eval_pert( mode, b, pert, 1.0, false );
      if( std::abs( p1 - b.p ) > kWitnessMargin )
         return ViolationNumbers{ b.p, p1 };
      return std::nullopt;
   }
   case Axiom::aggregate_monotonicity:
   {
      double p1 = eval_pert( mode, b, pert, 1.0, false );
      if( p1 < b.p - kWitnessMargin )
         return ViolationNumbers{ b.p, p1 };
      return std::nullopt;
   }
   case Axiom::dimensional_monotonicity:
   {
      double p1 = eval_pert( mode, b, pert, 1.0, false );
      if( p1 < b.p - kWitnessMargin )
         return ViolationNumbers{ b.p, p1 };
      return std::nullopt;
   }
   case Axiom::weak_rearrangement:
   case Axiom::weak_transfer:
   {
      double p1 = eval_pert( mode, b, pert, 1.0, false );
      if( p1 > b.p + kWitnessMargin )
         return ViolationNumbers{ b.p, p1 };
      return std::nullopt;
   }
   case Axiom::decomposability:
   {
      // Per-subgroup refits against the population's own refit.
      if( base.group.empty() )
         return std::nullopt;
      int parts = 1 + *std::max_element( base.group.begin(),
                                         base.group.end() );
      StableSum reconstructed;
      for( int g = 0; g < parts; ++g )
      {
         std::vector<std::size_t> rows = rows_of_group( base, g );
         if( rows.empty() )
            return std::nullopt;
         Dataset sub = b.data.subset( rows );
         double share = stable_sum( sub.weight ) / b.prof.weighted_total;
         reconstructed.add(
             share * eval_rows_insample( b, rows, base.poverty_cutoff,
                                         1.0 ) );
      }
      double sum = reconstructed.get();
      if( std::abs( sum - b.p ) > 1e-6 )
         return ViolationNumbers{ b.p, sum };
      return std::nullopt;
   }
   case Axiom::subgroup_consistency:
   {
      // The perturbation changes rows of group 1 only; every subgroup is
      // scored on its own refit.  A sign conflict between the subgroup's
      // change and the total's change is the violation.
      if( base.group.empty() )
         return std::nullopt;
      std::vector<std::size_t> rows = rows_of_group( base, 1 );
      if( rows.empty() )
         return std::nullopt;
      double part0 = eval_rows_insample( b, rows, base.poverty_cutoff, 1.0 );
      BaseEval bp = eval_base( pert, 1.0, false );
      double part1 =
          eval_rows_insample( bp, rows, pert.poverty_cutoff, 1.0 );
      double d_part = part1 - part0;
      double d_total = bp.p - b.p;
      if( ( d_part < -kWitnessMargin && d_total > kWitnessMargin ) ||
          ( d_part > kWitnessMargin && d_total < -kWitnessMargin ) )
         return ViolationNumbers{ b.p, bp.p };
      return std::nullopt;
   }
   default:
      return std::nullopt;
   }
}

Channel
classify_channel( const Instance& base, const Instance& pert )
{
   std::vector<IndicatorSpec> specs = instance_specs( base );
   ReferenceDistribution rb =
       fit_reference( instance_dataset( base ), specs, RefMode::in_sample );
   ReferenceDistribution rp =
       fit_reference( instance_dataset( pert ), specs, RefMode::in_sample );
   for( std::size_t j = 0; j < rb.columns.size(); ++j )
      if( rb.columns[j].min_value != rp.columns[j].min_value ||
          rb.columns[j].denom != rp.columns[j].denom )
         return Channel::denominator;
   return Channel::peer_redistribution;
}

Instance
make_instance( std::size_t rows, std::size_t cols, std::vector<int> values,
               std::vector<int> scale, std::vector<int> cutoff,
               std::vector<double> weights, double poverty_cutoff,
               std::vector<int> group = {} )
{
   Instance inst;
   inst.rows = rows;
   inst.cols = cols;
   inst.values = std::move( values );
   inst.scale = std::move( scale );
   inst.cutoff = std::move( cutoff );
   inst.indicator_weight = std::move( weights );
   inst.survey_weight.assign( rows, 1.0 );
   inst.group = std::move( group );
   inst.poverty_cutoff = poverty_cutoff;
   return inst;
}

/// Hand-built counterexamples, tried before any random search.
std::vector<Candidate>
probes_for( Axiom a, RefPolicy mode )
{
   std::vector<Candidate> probes;
   auto pert_cell = []( const Instance& base, std::size_t i, std::size_t j,
                        int to )
   {
      Instance pert = base;
      pert.at( i, j ) = to;
      return pert;
   };

   if( a == Axiom::weak_transfer )
   {
      // one person at 0, two at 1, three at 2; transfer one unit from a
      // person at 2 to the person at 0
      Instance base = make_instance( 6, 1, { 0, 1, 1, 2, 2, 2 }, { 4 },
                                     { 3 }, { 1.0 }, 1.0 );
      Instance pert = base;
      pert.at( 0, 0 ) = 1;
      pert.at( 3, 0 ) = 1;
      probes.push_back(
          { base, pert,
            "progressive one-unit transfer from a person at 2 to a person "
            "at 0, both poor",
            { 0, 3 } } );
      return probes;
   }

   if( mode != RefPolicy::in_sample )
      return probes;

   switch( a )
   {
   case Axiom::aggregate_monotonicity:
      // worsening 1 -> 0 creates a new minimum: denominator channel
      probes.push_back( { make_instance( 3, 1, { 1, 1, 2 }, { 4 }, { 3 },
                                         { 1.0 }, 1.0 ),
                          pert_cell( make_instance( 3, 1, { 1, 1, 2 },
                                                    { 4 }, { 3 }, { 1.0 },
                                                    1.0 ),
                                     0, 0, 0 ),
                          "worsening 1 -> 0 moves the observed minimum",
                          { 0 } } );
      // worsening 3 -> 2 with the minimum untouched: peer channel
      probes.push_back( { make_instance( 5, 1, { 0, 2, 2, 2, 3 }, { 5 },
                                         { 4 }, { 1.0 }, 1.0 ),
                          pert_cell( make_instance( 5, 1, { 0, 2, 2, 2, 3 },
                                                    { 5 }, { 4 }, { 1.0 },
                                                    1.0 ),
                                     4, 0, 2 ),
                          "worsening 3 -> 2 leaves the minimum in place "
                          "but lifts the share above the peers at 2",
                          { 4 } } );
      break;
   case Axiom::dimensional_monotonicity:
      probes.push_back( { make_instance( 5, 1, { 0, 1, 1, 1, 2 }, { 3 },
                                         { 2 }, { 1.0 }, 1.0 ),
                          pert_cell( make_instance( 5, 1, { 0, 1, 1, 1, 2 },
                                                    { 3 }, { 2 }, { 1.0 },
                                                    1.0 ),
                                     4, 0, 1 ),
                          "crossing into deprivation collapses the depth "
                          "scores of the peers at the same value",
                          { 4 } } );
      break;
   case Axiom::weak_rearrangement:
      probes.push_back( { make_instance( 5, 1, { 0, 1, 1, 1, 2 }, { 4 },
                                         { 3 }, { 1.0 }, 1.0 ),
                          pert_cell( make_instance( 5, 1, { 0, 1, 1, 1, 2 },
                                                    { 4 }, { 3 }, { 1.0 },
                                                    1.0 ),
                                     1, 0, 2 ),
                          "improving one deprived cell from 1 to 2 lifts "
                          "the remaining peers at 1",
                          { 1 } } );
      break;
   case Axiom::poverty_focus:
   {
      // a non-poor person with one deprivation changes that deprived cell
      Instance base =
          make_instance( 3, 2, { 1, 0, 0, 1, 2, 1 }, { 3, 2 }, { 2, 1 },
                         { 0.5, 0.5 }, 0.75 );
      probes.push_back(
          { base, pert_cell( base, 1, 0, 1 ),
            "a non-poor person improves a deprived cell and stays "
            "non-poor, but the refit moves everyone else's depth",
            { 1 } } );
      Instance base_intersection = base;
      base_intersection.poverty_cutoff = 1.0;
      probes.push_back(
          { base_intersection, pert_cell( base_intersection, 1, 0, 1 ),
            "same perturbation under intersection identification",
            { 1 } } );
      break;
   }
   case Axiom::decomposability:
      probes.push_back( { make_instance( 4, 1, { 0, 1, 1, 2 }, { 4 },
                                         { 3 }, { 1.0 }, 1.0,
                                         { 0, 0, 1, 1 } ),
                          make_instance( 4, 1, { 0, 1, 1, 2 }, { 4 },
                                         { 3 }, { 1.0 }, 1.0,
                                         { 0, 0, 1, 1 } ),
                          "per-subgroup refits rescale every depth score; "
                          "the weighted subgroup values overshoot the "
                          "population index",
                          {} } );
      break;
   case Axiom::subgroup_consistency:
   {
      Instance base = make_instance( 5, 1, { 0, 1, 1, 1, 2 }, { 3 }, { 2 },
                                     { 1.0 }, 1.0, { 0, 1, 1, 0, 0 } );
      probes.push_back(
          { base, pert_cell( base, 1, 0, 2 ),
            "the subgroup improves on its own refit while the population "
            "index rises",
            { 1 } } );
      break;
   }
   default:
      break;
   }
   return probes;
}

/// Greedy shrink: drop rows not pinned by the perturbation while the
/// violation survives.
void
shrink_candidate( Axiom a, RefPolicy mode, Candidate& cand )
{
   bool shrunk = true;
   while( shrunk && cand.base.rows > 2 )
   {
      shrunk = false;
      for( std::size_t victim = cand.base.rows; victim-- > 0; )
      {
         if( std::find( cand.pinned_rows.begin(), cand.pinned_rows.end(),
                        victim ) != cand.pinned_rows.end() )
            continue;
         Instance base = drop_row( cand.base, victim );
         Instance pert = drop_row( cand.perturbed, victim );
         if( !violation_numbers( a, mode, base, pert ) )
            continue;
         cand.base = std::move( base );
         cand.perturbed = std::move( pert );
         for( std::size_t& pinned : cand.pinned_rows )
            if( pinned > victim )
               --pinned;
         shrunk = true;
         break;
      }
   }
}

/// Random counterexample search for one axiom/mode, used when no probe
/// applies (and exercised by tests).
std::optional<Candidate>
search_candidate( Axiom a, RefPolicy mode, Rng& rng,
                  std::uint64_t attempts, bool force_union )
{
   for( std::uint64_t attempt = 0; attempt < attempts; ++attempt )
   {
      Instance inst = random_instance( rng, /*unit_weights*/ true, 8, 2 );
      if( force_union )
         inst.poverty_cutoff = union_cutoff( instance_specs( inst ) );
      if( a == Axiom::poverty_focus )
      {
         std::vector<double> grid = poverty_cutoff_grid( inst );
         if( grid.size() < 2 )
            continue;
         inst.poverty_cutoff = grid[1 + std::size_t( rng.below(
                                       int( grid.size() ) - 1 ) )];
      }
      if( a == Axiom::decomposability || a == Axiom::subgroup_consistency )
      {
         inst.group.assign( inst.rows, 0 );
         for( std::size_t i = 0; i < inst.rows; ++i )
            inst.group[i] = rng.below( 2 );
         if( rows_of_group( inst, 0 ).empty() ||
             rows_of_group( inst, 1 ).empty() )
            continue;
      }

      Candidate cand;
      cand.base = inst;
      cand.perturbed = inst;
      switch( a )
      {
      case Axiom::aggregate_monotonicity:
      case Axiom::dimensional_monotonicity:
      {
         auto i = std::size_t( rng.below( int( inst.rows ) ) );
         auto j = std::size_t( rng.below( int( inst.cols ) ) );
         int x = inst.at( i, j );
         if( a == Axiom::dimensional_monotonicity )
         {
            if( x < inst.cutoff[j] )
               continue;
            cand.perturbed.at( i, j ) = rng.below( inst.cutoff[j] );
         }
         else
         {
            if( x == 0 )
               continue;
            cand.perturbed.at( i, j ) = rng.below( x );
         }
         cand.pinned_rows = { i };
         cand.note = "randomized worsening";
         break;
      }
      case Axiom::weak_rearrangement:
      {
         auto i = std::size_t( rng.below( int( inst.rows ) ) );
         auto j = std::size_t( rng.below( int( inst.cols ) ) );
         int x = inst.at( i, j );
         if( x + 1 >= inst.cutoff[j] )
            continue;
         cand.perturbed.at( i, j ) =
             x + 1 + rng.below( inst.cutoff[j] - x - 1 );
         cand.pinned_rows = { i };
         cand.note = "randomized within-deprivation improvement";
         break;
      }
      case Axiom::weak_transfer:
      {
         auto j = std::size_t( rng.below( int( inst.cols ) ) );
         std::vector<std::size_t> lo;
         std::vector<std::size_t> hi;
         for( std::size_t i = 0; i < inst.rows; ++i )
            for( std::size_t i2 = 0; i2 < inst.rows; ++i2 )
               if( inst.at( i, j ) + 2 <= inst.at( i2, j ) )
               {
                  lo.push_back( i );
                  hi.push_back( i2 );
               }
         if( lo.empty() )
            continue;
         auto pick = std::size_t( rng.below( int( lo.size() ) ) );
         cand.perturbed.at( lo[pick], j ) = inst.at( lo[pick], j ) + 1;
         cand.perturbed.at( hi[pick], j ) = inst.at( hi[pick], j ) - 1;
         cand.pinned_rows = { lo[pick], hi[pick] };
         cand.note = "randomized progressive transfer";
         break;
      }
      case Axiom::poverty_focus:
      {
         // needs a non-poor person with a deprived cell
         BaseEval b = eval_base( inst, 1.0, false );
         std::vector<std::pair<std::size_t, std::size_t>> cells;
         for( std::size_t i = 0; i < inst.rows; ++i )
         {
            if( b.prof.poor[i] )
               continue;
            for( std::size_t j = 0; j < inst.cols; ++j )
               if( inst.at( i, j ) < inst.cutoff[j] &&
                   inst.cutoff[j] > 1 )
                  cells.emplace_back( i, j );
         }
         if( cells.empty() )
            continue;
         auto [i, j] =
             cells[std::size_t( rng.below( int( cells.size() ) ) )];
         int to = rng.below( inst.cutoff[j] );
         if( to == inst.at( i, j ) )
            continue;
         cand.perturbed.at( i, j ) = to;
         cand.pinned_rows = { i };
         cand.note = "randomized change to a non-poor person's deprived "
                     "cell";
         break;
      }
      case Axiom::decomposability:
         cand.note = "randomized two-way split, per-subgroup refits";
         break;
      case Axiom::subgroup_consistency:
      {
         std::vector<std::size_t> rows = rows_of_group( inst, 1 );
         auto i = rows[std::size_t( rng.below( int( rows.size() ) ) )];
         auto j = std::size_t( rng.below( int( inst.cols ) ) );
         int to = rng.below( inst.scale[j] );
         if( to == inst.at( i, j ) )
            continue;
         cand.perturbed.at( i, j ) = to;
         cand.pinned_rows = { i };
         cand.note = "randomized change within one subgroup";
         break;
      }
      default:
         return std::nullopt;
      }

      if( violation_numbers( a, mode, cand.base, cand.perturbed ) )
      {
         shrink_candidate( a, mode, cand );
         return cand;
      }
   }
   return std::nullopt;
}

std::optional<Witness>
certify( Axiom a, RefPolicy mode, const Candidate& cand )
{
   std::optional<ViolationNumbers> numbers =
       violation_numbers( a, mode, cand.base, cand.perturbed );
   if( !numbers )
      return std::nullopt;
   Witness w;
   w.base = cand.base;
   w.perturbed = cand.perturbed;
   w.mode = mode;
   w.p_base = numbers->p_base;
   w.p_perturbed = numbers->p_perturbed;
   w.note = cand.note;
   if( mode == RefPolicy::in_sample && a != Axiom::decomposability &&
       a != Axiom::subgroup_consistency )
      w.channel = classify_channel( cand.base, cand.perturbed );
   else if( mode == RefPolicy::anchored )
      w.channel = Channel::reference_shape;
   // witnesses re-verify by reproducing the recorded numbers exactly
   std::optional<ViolationNumbers> again =
       violation_numbers( a, mode, w.base, w.perturbed );
   w.verified = again &&
                std::abs( again->p_base - w.p_base ) <= kEqTol &&
                std::abs( again->p_perturbed - w.p_perturbed ) <= kEqTol;
   if( !w.verified )
      return std::nullopt;
   return w;
}

void
run_fails( Axiom a, RefPolicy mode, const LabOptions& opt,
           CheckResult& res )
{
   // Aggregate monotonicity under refit must exhibit both failure
   // channels; everything else needs one witness.
   bool need_both_channels =
       a == Axiom::aggregate_monotonicity && mode == RefPolicy::in_sample;

   for( const Candidate& probe : probes_for( a, mode ) )
      if( std::optional<Witness> w = certify( a, mode, probe ) )
         res.witnesses.push_back( std::move( *w ) );

   auto have_channel = [&]( Channel c )
   {
      for( const Witness& w : res.witnesses )
         if( w.channel == c )
            return true;
      return false;
   };
   bool satisfied =
       need_both_channels
           ? have_channel( Channel::denominator ) &&
                 have_channel( Channel::peer_redistribution )
           : !res.witnesses.empty();

   if( !satisfied )
   {
      Rng rng( cell_seed( opt.seed, a, mode ) );
      for( std::uint64_t round = 0; round < 8 && !satisfied; ++round )
      {
         std::optional<Candidate> cand =
             search_candidate( a, mode, rng, opt.witness_attempts / 8,
                               opt.union_identification );
         if( !cand )
            break;
         if( std::optional<Witness> w = certify( a, mode, *cand ) )
         {
            res.witnesses.push_back( std::move( *w ) );
            satisfied = need_both_channels
                            ? have_channel( Channel::denominator ) &&
                                  have_channel(
                                      Channel::peer_redistribution )
                            : !res.witnesses.empty();
         }
      }
   }

   res.outcome = satisfied ? Outcome::confirmed : Outcome::inconclusive;
   if( res.outcome == Outcome::inconclusive )
      res.detail = "no counterexample found within the attempt budget";
}

void
run_holds( Axiom a, RefPolicy mode, const LabOptions& opt, CheckResult& res,
           bool union_only )
{
   CheckContext ctx;
   ctx.mode = mode;
   ctx.skip_censoring = opt.inject_skip_censoring;
   ctx.result = &res;
   bool restrict_union = union_only || opt.union_identification;

   ctx.exhaustive = true;
   ctx.alpha = 1.0;
   for_each_exhaustive( opt,
                        [&]( const Instance& inst )
                        {
                           if( restrict_union &&
                               inst.poverty_cutoff >
                                   union_cutoff( instance_specs( inst ) ) )
                              return;
                           check_one_holds( a, ctx, inst, nullptr );
                        } );

   ctx.exhaustive = false;
   Rng rng( cell_seed( opt.seed, a, mode ) );
   for( std::uint64_t trial = 0; trial < opt.random_trials; ++trial )
   {
      // alternate unit and weighted data, and exercise alpha = 2 alongside
      // the headline index
      Instance inst = random_instance( rng, trial % 2 == 0 );
      if( restrict_union )
         inst.poverty_cutoff = union_cutoff( instance_specs( inst ) );
      ctx.alpha = trial % 4 == 3 ? 2.0 : 1.0;
      check_one_holds( a, ctx, inst, &rng );
   }

   res.outcome =
       res.violations == 0 ? Outcome::confirmed : Outcome::violated;
}

} // namespace

// ---------------------------------------------------------------------

std::string
to_string( Axiom a )
{
   switch( a )
   {
   case Axiom::symmetry:
      return "symmetry";
   case Axiom::replication_invariance:
      return "replication invariance";
   case Axiom::bounds:
      return "bounds";
   case Axiom::ordinal_invariance:
      return "ordinal invariance";
   case Axiom::deprivation_focus:
      return "deprivation focus";
   case Axiom::poverty_focus:
      return "poverty focus";
   case Axiom::own_monotonicity:
      return "own-person monotonicity";
   case Axiom::aggregate_monotonicity:
      return "aggregate monotonicity";
   case Axiom::dimensional_monotonicity:
      return "dimensional monotonicity";
   case Axiom::decomposability:
      return "decomposability";
   case Axiom::subgroup_consistency:
      return "subgroup consistency";
   case Axiom::weak_rearrangement:
      return "weak rearrangement";
   case Axiom::weak_transfer:
      return "weak transfer";
   }
   return "?";
}

std::string
to_string( RefPolicy m )
{
   return m == RefPolicy::anchored ? "anchored" : "in-sample";
}

std::string
to_string( Verdict v )
{
   switch( v )
   {
   case Verdict::holds:
      return "holds";
   case Verdict::fails:
      return "fails";
   case Verdict::conditional:
      return "conditional";
   }
   return "?";
}

std::string
to_string( Outcome o )
{
   switch( o )
   {
   case Outcome::confirmed:
      return "confirmed";
   case Outcome::violated:
      return "violated";
   case Outcome::inconclusive:
      return "inconclusive";
   }
   return "?";
}

std::string
to_string( Channel c )
{
   switch( c )
   {
   case Channel::unclassified:
      return "unclassified";
   case Channel::denominator:
      return "denominator";
   case Channel::peer_redistribution:
      return "peer redistribution";
   case Channel::reference_shape:
      return "reference shape";
   }
   return "?";
}

Instance
gen_matrix( std::uint64_t seed, std::size_t n, std::size_t d,
            std::span<const int> scales, WeightScheme scheme )
{
   if( n == 0 || d == 0 || scales.size() != d )
      lab_fail( "bad generator arguments" );
   Rng rng( seed );
   Instance inst;
   inst.rows = n;
   inst.cols = d;
   inst.scale.assign( scales.begin(), scales.end() );
   for( int s : inst.scale )
      if( s < 2 )
         lab_fail( "scales need at least two codes" );

   inst.cutoff.resize( d );
   for( std::size_t j = 0; j < d; ++j )
      inst.cutoff[j] = 1 + rng.below( inst.scale[j] - 1 );

   inst.indicator_weight.assign( d, 1.0 );
   inst.survey_weight.assign( n, 1.0 );
   if( scheme == WeightScheme::random_weights )
   {
      for( double& w : inst.indicator_weight )
         w = 0.5 + 1.5 * rng.uniform();
      for( double& w : inst.survey_weight )
         w = 0.5 + 2.0 * rng.uniform();
   }
   StableSum sum;
   for( double w : inst.indicator_weight )
      sum.add( w );
   for( double& w : inst.indicator_weight )
      w /= sum.get();

   inst.values.resize( n * d );
   for( std::size_t i = 0; i < n; ++i )
      for( std::size_t j = 0; j < d; ++j )
         inst.values[i * d + j] =
             rng.uniform() < 0.35 ? 0 : rng.below( inst.scale[j] );
   inst.poverty_cutoff = 1.0;
   return inst;
}

std::vector<IndicatorSpec>
instance_specs( const Instance& inst )
{
   std::vector<IndicatorSpec> specs( inst.cols );
   for( std::size_t j = 0; j < inst.cols; ++j )
   {
      specs[j].name = "i" + std::to_string( j );
      specs[j].source_column = specs[j].name;
      specs[j].kind = IndicatorKind::ordinal;
      specs[j].categories.resize( std::size_t( inst.scale[j] ) );
      specs[j].cutoff = double( inst.cutoff[j] );
      specs[j].weight = inst.indicator_weight[j];
   }
   return specs;
}

Dataset
instance_dataset( const Instance& inst )
{
   Dataset data;
   data.rows = inst.rows;
   data.cols = inst.cols;
   data.values.resize( inst.values.size() );
   for( std::size_t c = 0; c < inst.values.size(); ++c )
      data.values[c] = double( inst.values[c] );
   data.missing.assign( inst.values.size(), 0 );
   data.weight = inst.survey_weight;
   if( !inst.group.empty() )
   {
      data.group.resize( inst.rows );
      for( std::size_t i = 0; i < inst.rows; ++i )
         data.group[i] = "g" + std::to_string( inst.group[i] );
   }
   return data;
}

double
evaluate_index( const Instance& inst, RefPolicy mode,
                const ReferenceDistribution* anchor, double alpha )
{
   std::vector<IndicatorSpec> specs = instance_specs( inst );
   Dataset data = instance_dataset( inst );
   ReferenceDistribution own;
   const ReferenceDistribution* ref = anchor;
   if( mode == RefPolicy::in_sample || !anchor )
   {
      own = fit_reference( data, specs, RefMode::in_sample );
      ref = &own;
   }
   DeprivationProfile prof =
       build_profile( data, specs, *ref, inst.poverty_cutoff );
   return index_of( prof, alpha, false );
}

Verdict
expected_verdict( Axiom a, RefPolicy mode )
{
   if( mode == RefPolicy::anchored )
      return a == Axiom::weak_transfer ? Verdict::fails : Verdict::holds;
   switch( a )
   {
   case Axiom::symmetry:
   case Axiom::replication_invariance:
   case Axiom::bounds:
   case Axiom::ordinal_invariance:
   case Axiom::deprivation_focus:
   case Axiom::own_monotonicity:
      return Verdict::holds;
   case Axiom::poverty_focus:
      return Verdict::conditional;
   default:
      return Verdict::fails;
   }
}

CheckResult
check_axiom( Axiom a, RefPolicy mode, const LabOptions& opt )
{
   CheckResult res;
   res.axiom = a;
   res.mode = mode;
   res.expected = expected_verdict( a, mode );
   switch( res.expected )
   {
   case Verdict::holds:
      run_holds( a, mode, opt, res, /*union_only*/ false );
      break;
   case Verdict::fails:
      run_fails( a, mode, opt, res );
      break;
   case Verdict::conditional:
   {
      if( opt.union_identification )
      {
         // the condition is satisfied by construction
         res.expected = Verdict::holds;
         run_holds( a, mode, opt, res, /*union_only*/ true );
         break;
      }
      // holds under union identification ...
      run_holds( a, mode, opt, res, /*union_only*/ true );
      if( res.outcome == Outcome::confirmed )
      {
         // ... and needs a counterexample away from union
         CheckResult fail_part;
         fail_part.axiom = a;
         fail_part.mode = mode;
         run_fails( a, mode, opt, fail_part );
         res.witnesses = std::move( fail_part.witnesses );
         res.outcome = fail_part.outcome;
         res.detail = res.outcome == Outcome::confirmed
                          ? "no effect under union identification; "
                            "counterexample found away from union"
                          : fail_part.detail;
      }
      break;
   }
   }
   return res;
}

Witness
find_weak_transfer_witness( RefPolicy mode, const LabOptions& opt )
{
   CheckResult res;
   res.axiom = Axiom::weak_transfer;
   res.mode = mode;
   run_fails( Axiom::weak_transfer, mode, opt, res );
   if( res.witnesses.empty() )
      lab_fail( "no progressive-transfer counterexample found" );
   return res.witnesses.front();
}

GridReport
run_axiom_grid( const LabOptions& opt )
{
   GridReport report;
   report.options = opt;
   report.all_confirmed = true;
   for( Axiom a : kAllAxioms )
      for( RefPolicy mode : { RefPolicy::anchored, RefPolicy::in_sample } )
      {
         report.cells.push_back( check_axiom( a, mode, opt ) );
         report.all_confirmed =
             report.all_confirmed &&
             report.cells.back().outcome == Outcome::confirmed;
      }
   return report;
}

namespace
{

nlohmann::json
instance_json( const Instance& inst )
{
   nlohmann::json node;
   node["rows"] = inst.rows;
   node["cols"] = inst.cols;
   node["scale"] = inst.scale;
   node["cutoff"] = inst.cutoff;
   node["indicator_weight"] = inst.indicator_weight;
   node["survey_weight"] = inst.survey_weight;
   node["poverty_cutoff"] = inst.poverty_cutoff;
   nlohmann::json rows = nlohmann::json::array();
   for( std::size_t i = 0; i < inst.rows; ++i )
   {
      nlohmann::json row = nlohmann::json::array();
      for( std::size_t j = 0; j < inst.cols; ++j )
         row.push_back( inst.at( i, j ) );
      rows.push_back( std::move( row ) );
   }
   node["values"] = std::move( rows );
   if( !inst.group.empty() )
      node["group"] = inst.group;
   return node;
}

} // namespace

std::string
grid_report_json( const GridReport& report )
{
   nlohmann::json doc;
   doc["format"] = "ppg-axiom-grid";
   doc["version"] = 1;
   doc["seed"] = report.options.seed;
   doc["random_trials"] = report.options.random_trials;
   doc["exhaustive_rows"] = report.options.exhaustive_rows;
   doc["exhaustive_cols"] = report.options.exhaustive_cols;
   doc["exhaustive_scale"] = report.options.exhaustive_scale;
   doc["all_confirmed"] = report.all_confirmed;
   nlohmann::json cells = nlohmann::json::array();
   for( const CheckResult& res : report.cells )
   {
      nlohmann::json cell;
      cell["axiom"] = to_string( res.axiom );
      cell["mode"] = to_string( res.mode );
      cell["expected"] = to_string( res.expected );
      cell["outcome"] = to_string( res.outcome );
      cell["exhaustive_cases"] = res.exhaustive_cases;
      cell["random_cases"] = res.random_cases;
      cell["violations"] = res.violations;
      if( !res.detail.empty() )
         cell["detail"] = res.detail;
      nlohmann::json witnesses = nlohmann::json::array();
      for( const Witness& w : res.witnesses )
      {
         nlohmann::json node;
         node["note"] = w.note;
         node["channel"] = to_string( w.channel );
         node["p_base"] = w.p_base;
         node["p_perturbed"] = w.p_perturbed;
         node["verified"] = w.verified;
         node["base"] = instance_json( w.base );
         node["perturbed"] = instance_json( w.perturbed );
         witnesses.push_back( std::move( node ) );
      }
      if( !witnesses.empty() )
         cell["witnesses"] = std::move( witnesses );
      cells.push_back( std::move( cell ) );
   }
   doc["cells"] = std::move( cells );
   return doc.dump( 2 ) + "\n";
}

std::string
grid_report_text( const GridReport& report )
{
   std::ostringstream out;
   out << "property                     mode       expected     outcome      "
          "checks        violations\n";
   for( const CheckResult& res : report.cells )
   {
      char line[256];
      std::snprintf( line, sizeof( line ),
                     "%-28s %-10s %-12s %-12s %-13llu %llu\n",
                     to_string( res.axiom ).c_str(),
                     to_string( res.mode ).c_str(),
                     to_string( res.expected ).c_str(),
                     to_string( res.outcome ).c_str(),
                     static_cast<unsigned long long>(
                         res.exhaustive_cases + res.random_cases ),
                     static_cast<unsigned long long>( res.violations ) );
      out << line;
      for( const Witness& w : res.witnesses )
      {
         std::snprintf( line, sizeof( line ),
                        "    witness (%s, %s): %.12g -> %.12g, %s\n",
                        to_string( w.channel ).c_str(),
                        w.verified ? "verified" : "UNVERIFIED", w.p_base,
                        w.p_perturbed, w.note.c_str() );
         out << line;
      }
   }
   out << ( report.all_confirmed
                ? "grid matches the expected pattern\n"
                : "GRID MISMATCH\n" );
   return out.str();
}

} // namespace ppg::lab
