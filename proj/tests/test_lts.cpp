#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace distdiag;
using support::fixture;

namespace
{

Alphabet example_alphabet()
{
    Alphabet s;
    for ( auto o : { "o1", "o2", "o3", "o4", "o5" } )
        s.add( o, ActionKind::Observable );
    for ( auto u : { "u1", "u2", "u3" } )
        s.add( u, ActionKind::Unobservable );
    s.add( "f", ActionKind::Fault );
    return s;
}

} // namespace

TEST( Alphabet, RejectsKindConflictsAndEmptyLabels )
{
    Alphabet s;
    EXPECT_EQ( s.add( "a", ActionKind::Observable ), 0u );
    EXPECT_EQ( s.add( "a", ActionKind::Observable ), 0u );
    EXPECT_THROW( static_cast<void>( s.add( "a", ActionKind::Unobservable ) ), InputDomainError );
    EXPECT_THROW( static_cast<void>( s.add( "", ActionKind::Observable ) ), InputDomainError );
    EXPECT_THROW( static_cast<void>( s.at( "missing" ) ), InputDomainError );
}

TEST( Alphabet, FaultsCountAsUnobservable )
{
    auto s = example_alphabet();
    auto f = s.at( "f" );
    EXPECT_TRUE( s.fault( f ) );
    EXPECT_FALSE( s.observable( f ) );
    EXPECT_EQ( s.fault_labels(), std::vector<std::string>{ "f" } );
    EXPECT_EQ( s.labels_of( ActionKind::Unobservable ), ( std::vector<std::string>{ "u1", "u2", "u3" } ) );
}

TEST( Alphabet, EqualityIgnoresInsertionOrder )
{
    Alphabet a, b;
    a.add( "x", ActionKind::Observable );
    a.add( "f", ActionKind::Fault );
    b.add( "f", ActionKind::Fault );
    b.add( "x", ActionKind::Observable );
    EXPECT_TRUE( a == b );
    b.add( "y", ActionKind::Observable );
    EXPECT_FALSE( a == b );
}

TEST( Lts, RejectsMalformedStructure )
{
    auto s = example_alphabet();
    EXPECT_THROW( Lts( s, 0, 0, {} ), InputDomainError );
    EXPECT_THROW( Lts( s, 2, 2, {} ), InputDomainError );
    EXPECT_THROW( Lts( s, 2, 0, { { 0, 0, 5 } } ), InputDomainError );
    EXPECT_THROW( Lts( s, 2, 0, { { 0, 99, 1 } } ), InputDomainError );
}

TEST( Lts, CollapsesDuplicatesAndIndexesAdjacency )
{
    auto s = example_alphabet();
    auto g = make_lts( s, 3, 0, { { 0, "o1", 1 }, { 0, "o1", 1 }, { 0, "f", 2 }, { 2, "o3", 2 } } );
    EXPECT_EQ( g.num_transitions(), 3u );
    EXPECT_EQ( g.out( 0 ).size(), 2u );
    EXPECT_EQ( g.out( 0, s.at( "o1" ) ).size(), 1u );
    EXPECT_TRUE( g.has_transition( 2, s.at( "o3" ), 2 ) );
    EXPECT_FALSE( g.has_transition( 1, s.at( "o3" ), 1 ) );
}

TEST( Observe, KeepsObservableActionsOnly )
{
    auto s = example_alphabet();
    EXPECT_EQ( observe( {}, s ), Trace{} );
    EXPECT_EQ( observe( { "o1", "f", "o3", "u3", "o5" }, s ), ( Trace{ "o1", "o3", "o5" } ) );
    EXPECT_EQ( observe( { "u1", "u2" }, s ), Trace{} );
}

TEST( Observe, LassoDegeneratesWhenCycleIsSilent )
{
    auto s = example_alphabet();
    auto a = observe_lasso( { { "o1", "f", "o3", "u3" }, { "o5" } }, s );
    ASSERT_TRUE( std::holds_alternative<Lasso>( a ) );
    EXPECT_EQ( std::get<Lasso>( a ), ( Lasso{ { "o1", "o3" }, { "o5" } } ) );

    auto b = observe_lasso( { {}, { "u1" } }, s );
    ASSERT_TRUE( std::holds_alternative<Trace>( b ) );
    EXPECT_TRUE( std::get<Trace>( b ).empty() );

    auto c = observe_lasso( { { "f" }, { "o3" } }, s );
    EXPECT_EQ( std::get<Lasso>( c ), ( Lasso{ {}, { "o3" } } ) );
    EXPECT_THROW( static_cast<void>( observe_lasso( { { "o1" }, {} }, s ) ), InputDomainError );
}

TEST( Observe, HomomorphismIdempotenceAndLength )
{
    auto s = example_alphabet();
    std::mt19937_64 rng( 11 );
    const auto labels = s.labels();
    auto random_trace = [ & ] {
        Trace t( rng() % 8 );
        for ( auto& a : t )
            a = labels[ rng() % labels.size() ];
        return t;
    };
    for ( int k = 0; k < 500; ++k )
    {
        auto a = random_trace(), b = random_trace();
        auto ab = a;
        ab.insert( ab.end(), b.begin(), b.end() );
        auto oa = observe( a, s ), ob = observe( b, s );
        auto concat = oa;
        concat.insert( concat.end(), ob.begin(), ob.end() );
        EXPECT_EQ( observe( ab, s ), concat );
        EXPECT_EQ( observe( oa, s ), oa );
        EXPECT_LE( oa.size(), a.size() );
        bool all_observable = std::all_of( a.begin(), a.end(), [ & ]( auto& l ) { return s.observable( s.at( l ) ); } );
        EXPECT_EQ( oa.size() == a.size(), all_observable );
    }
}

TEST( Normalize, IdentifiesEqualOmegaWords )
{
    EXPECT_TRUE( same_omega_word( { { "a" }, { "b", "a" } }, { {}, { "a", "b" } } ) );
    EXPECT_TRUE( same_omega_word( { {}, { "a", "a", "a" } }, { { "a", "a" }, { "a" } } ) );
    EXPECT_TRUE( same_omega_word( { { "x" }, { "a", "b", "a", "b" } }, { { "x", "a", "b" }, { "a", "b" } } ) );
    EXPECT_FALSE( same_omega_word( { {}, { "a", "b" } }, { {}, { "b", "a" } } ) );
    EXPECT_FALSE( same_omega_word( { { "a" }, { "b" } }, { {}, { "b" } } ) );
}

TEST( Normalize, AgreesWithUnrolledComparison )
{
    // Two lassos denote the same word iff their unrollings agree on a long
    // enough window (prefix lengths plus the product of cycle lengths).
    std::mt19937_64 rng( 5 );
    auto word = [ & ]( std::size_t min ) {
        Trace t( min + rng() % 3 );
        for ( auto& a : t )
            a = rng() % 2 ? "a" : "b";
        return t;
    };
    auto unroll = []( const Lasso& l, std::size_t n ) {
        Trace t = l.prefix;
        while ( t.size() < n )
            t.push_back( l.cycle[ ( t.size() - l.prefix.size() ) % l.cycle.size() ] );
        t.resize( n );
        return t;
    };
    for ( int k = 0; k < 2000; ++k )
    {
        Lasso x{ word( 0 ), word( 1 ) }, y{ word( 0 ), word( 1 ) };
        auto n = x.prefix.size() + y.prefix.size() + x.cycle.size() * y.cycle.size() + 1;
        EXPECT_EQ( same_omega_word( x, y ), unroll( x, n ) == unroll( y, n ) );
    }
}

TEST( Validation, LivenessOnFixturesAndDeadStates )
{
    EXPECT_TRUE( validate_live( fixture( "A" ) ) );
    EXPECT_TRUE( validate_live( fixture( "C" ) ) );

    Lts lone( example_alphabet(), 1, 0, {} );
    auto report = validate_live( lone );
    EXPECT_FALSE( report );
    EXPECT_EQ( report.states, std::vector<StateId>{ 0 } );

    auto af = fault_free( fixture( "A" ), "f" );
    EXPECT_FALSE( validate_live( af ) );
}

TEST( Validation, UnobservableCycles )
{
    EXPECT_TRUE( validate_no_unobservable_cycles( fixture( "B" ) ) );
    auto s = example_alphabet();
    auto loop = make_lts( s, 2, 0, { { 0, "u1", 1 }, { 1, "u2", 0 } } );
    auto report = validate_no_unobservable_cycles( loop );
    EXPECT_FALSE( report );
    EXPECT_EQ( report.states.size(), 2u );
    EXPECT_TRUE( validate_no_unobservable_cycles( Lts( s, 3, 0, {} ) ) );

    // Only reachable cycles count.
    auto island = make_lts( s, 3, 0, { { 0, "o1", 0 }, { 1, "u1", 2 }, { 2, "u1", 1 } } );
    EXPECT_TRUE( validate_no_unobservable_cycles( island ) );
}

TEST( Validation, LiveAndSilentAcyclicMeansEveryLassoObservesForever )
{
    // Bounded lasso enumeration: every simple cycle reachable in a valid
    // system carries an observable action.
    for ( std::uint64_t seed = 0; seed < 200; ++seed )
    {
        auto g = support::random_lts( seed );
        ASSERT_TRUE( validate_live( g ) );
        ASSERT_TRUE( validate_no_unobservable_cycles( g ) );
        auto seen = reachable_states( g );
        std::vector<std::pair<StateId, Trace>> stack;
        for ( StateId q = 0; q < g.num_states(); ++q )
        {
            if ( !seen[ q ] )
                continue;
            // DFS over simple paths from q back to q.
            std::vector<std::tuple<StateId, Trace, std::vector<bool>>> work;
            std::vector<bool> on( g.num_states(), false );
            on[ q ] = true;
            work.emplace_back( q, Trace{}, on );
            while ( !work.empty() )
            {
                auto [ s, t, visited ] = std::move( work.back() );
                work.pop_back();
                for ( const auto& e : g.out( s ) )
                {
                    auto u = t;
                    u.push_back( g.alphabet().label( e.action ) );
                    if ( e.target == q )
                        EXPECT_FALSE( observe( u, g.alphabet() ).empty() ) << "seed " << seed;
                    else if ( !visited[ e.target ] )
                    {
                        auto v = visited;
                        v[ e.target ] = true;
                        work.emplace_back( e.target, std::move( u ), std::move( v ) );
                    }
                }
            }
        }
    }
}

TEST( Reachable, RemovesIslandsAndIsIdempotent )
{
    auto s = example_alphabet();
    auto g = make_lts( s, 4, 0, { { 0, "o1", 1 }, { 1, "o2", 0 }, { 2, "o3", 3 }, { 3, "o3", 2 } } );
    auto r = reachable( g );
    EXPECT_EQ( r.num_states(), 2u );
    EXPECT_EQ( r.num_transitions(), 2u );
    EXPECT_TRUE( isomorphic( reachable( r ), r ) );
    EXPECT_TRUE( isomorphic( reachable( fixture( "C" ) ), fixture( "C" ) ) );
}

TEST( Reachable, PreservesTraceSets )
{
    for ( std::uint64_t seed = 0; seed < 100; ++seed )
    {
        auto g = support::random_lts( seed );
        // Add an unreachable copy of the initial state's edges.
        auto edges = g.transitions();
        const auto extra = static_cast<StateId>( g.num_states() );
        for ( const auto& e : g.out( g.initial() ) )
            edges.push_back( { extra, e.action, e.target } );
        Lts padded( g.alphabet(), g.num_states() + 1, g.initial(), edges );
        auto r = reachable( padded );
        EXPECT_EQ( r.num_states(), g.num_states() );
        EXPECT_EQ( support::finite_traces( r, 6 ), support::finite_traces( padded, 6 ) );
    }
}

TEST( Accepts, FiniteAndInfiniteTraces )
{
    auto c = fixture( "C" );
    EXPECT_TRUE( accepts( c, Trace{ "o1", "f", "o3" } ) );
    EXPECT_FALSE( accepts( c, Trace{ "o1", "o3" } ) );
    EXPECT_TRUE( accepts( c, Lasso{ { "o2", "u2" }, { "o4" } } ) );
    EXPECT_TRUE( accepts( c, Lasso{ { "o2" }, { "o3" } } ) );
    EXPECT_FALSE( accepts( c, Lasso{ { "o2" }, { "o4" } } ) );
}
