#include "support.hpp"

#include <gtest/gtest.h>

using namespace distdiag;
using support::fixture;

namespace
{

Lts product( const char* x, const char* y ) { return sync_product( fixture( x ), fixture( y ) ).lts; }

Lts reduced_left( const char* x, const char* y )
{
    return sync_product( fault_free( fixture( x ), "f" ), fixture( y ) ).lts;
}

Lts reduced_right( const char* x, const char* y )
{
    return sync_product( fixture( x ), fault_free( fixture( y ), "f" ) ).lts;
}

/// Twin plant size computed directly: pairs of (state, tag) reachable by
/// joint observable moves and one-sided unobservable moves.
std::size_t twin_size_oracle( const Lts& g, const std::string& fault )
{
    using Side = std::pair<StateId, int>;
    auto moves = [ & ]( Side s, bool observable ) {
        std::vector<std::pair<std::string, Side>> out;
        for ( const auto& e : g.out( s.first ) )
        {
            const auto& label = g.alphabet().label( e.action );
            if ( g.alphabet().observable( e.action ) != observable )
                continue;
            out.push_back( { label, { e.target, label == fault ? 1 : s.second } } );
        }
        return out;
    };
    std::set<std::pair<Side, Side>> seen{ { { g.initial(), 0 }, { g.initial(), 0 } } };
    std::vector<std::pair<Side, Side>> work( seen.begin(), seen.end() );
    while ( !work.empty() )
    {
        auto [ l, r ] = work.back();
        work.pop_back();
        std::vector<std::pair<Side, Side>> next;
        for ( const auto& [ a, l2 ] : moves( l, true ) )
            for ( const auto& [ b, r2 ] : moves( r, true ) )
                if ( a == b )
                    next.push_back( { l2, r2 } );
        for ( const auto& [ a, l2 ] : moves( l, false ) )
            next.push_back( { l2, r } );
        for ( const auto& [ b, r2 ] : moves( r, false ) )
            next.push_back( { l, r2 } );
        for ( const auto& n : next )
            if ( seen.insert( n ).second )
                work.push_back( n );
    }
    return seen.size();
}

Lts rename_observables( const Lts& g )
{
    Alphabet s;
    for ( const auto& l : g.alphabet().labels() )
    {
        auto k = g.alphabet().kind( g.alphabet().at( l ) );
        s.add( k == ActionKind::Observable ? "z_" + l : l, k );
    }
    std::vector<Transition> edges;
    for ( const auto& t : g.transitions() )
    {
        const auto& l = g.alphabet().label( t.action );
        edges.push_back( { t.source, s.at( g.alphabet().observable( t.action ) ? "z_" + l : l ), t.target } );
    }
    return Lts( s, g.num_states(), g.initial(), edges );
}

} // namespace

TEST( AnnotateFaults, Tags )
{
    Alphabet s;
    s.add( "o", ActionKind::Observable );
    s.add( "f", ActionKind::Fault );
    auto clean = make_lts( s, 2, 0, { { 0, "o", 1 }, { 1, "o", 0 } } );
    auto a = annotate_faults( clean, "f" );
    EXPECT_TRUE( isomorphic( a.lts, clean ) );
    for ( auto t : a.tag )
        EXPECT_EQ( t, FaultTag::N );

    auto chain = annotate_faults( make_lts( s, 2, 0, { { 0, "f", 1 }, { 1, "o", 1 } } ), "f" );
    ASSERT_EQ( chain.lts.num_states(), 2u );
    EXPECT_EQ( chain.tag[ 0 ], FaultTag::N );
    EXPECT_EQ( chain.base[ 1 ], 1u );
    EXPECT_EQ( chain.tag[ 1 ], FaultTag::F );

    auto fa = annotate_faults( fixture( "A" ), "f" );
    for ( StateId q = 0; q < fa.lts.num_states(); ++q )
        EXPECT_EQ( fa.tag[ q ], q == fa.lts.initial() ? FaultTag::N : FaultTag::F );
    EXPECT_THROW( static_cast<void>( annotate_faults( fixture( "A" ), "o2" ) ), InputDomainError );
}

TEST( AnnotateFaults, AtMostDoubles )
{
    for ( std::uint64_t seed = 0; seed < 100; ++seed )
    {
        auto g = support::random_lts( seed );
        for ( const auto& f : g.alphabet().fault_labels() )
            EXPECT_LE( annotate_faults( g, f ).lts.num_states(), 2 * g.num_states() );
    }
}

TEST( TwinPlant, SingleLoop )
{
    Alphabet s;
    s.add( "o", ActionKind::Observable );
    s.add( "f", ActionKind::Fault );
    auto g = make_lts( s, 1, 0, { { 0, "o", 0 } } );
    for ( bool symmetry : { true, false } )
    {
        auto tp = build_twin_plant( g, "f", { symmetry, {} } );
        EXPECT_EQ( tp.num_states(), 1u );
        ASSERT_EQ( tp.edges.size(), 1u );
        EXPECT_EQ( tp.edges[ 0 ].move, TwinMove::Joint );
        EXPECT_FALSE( find_ambiguous_cycle( tp ) );
    }
}

TEST( TwinPlant, SizeMatchesPairOracle )
{
    auto ab = product( "A", "B" );
    auto full = build_twin_plant( ab, "f", { false, {} } );
    EXPECT_EQ( full.num_states(), twin_size_oracle( ab, "f" ) );
    for ( std::uint64_t seed = 0; seed < 150; ++seed )
    {
        auto g = support::random_lts( seed );
        for ( const auto& f : g.alphabet().fault_labels() )
        {
            auto plain = build_twin_plant( g, f, { false, {} } );
            auto sym = build_twin_plant( g, f, { true, {} } );
            EXPECT_EQ( plain.num_states(), twin_size_oracle( g, f ) );
            std::size_t diagonal = 0;
            for ( const auto& [ l, r ] : plain.states )
                diagonal += l == r;
            EXPECT_EQ( sym.num_states(), ( plain.num_states() + diagonal ) / 2 );
        }
    }
}

TEST( TwinPlant, TagsNeverRecover )
{
    for ( std::uint64_t seed = 0; seed < 150; ++seed )
    {
        auto g = support::random_lts( seed );
        for ( const auto& f : g.alphabet().fault_labels() )
        {
            auto tp = build_twin_plant( g, f, { false, {} } );
            for ( StateId s = 0; s < tp.num_states(); ++s )
                for ( const auto& e : tp.out( s ) )
                {
                    if ( tp.left_tag( s ) == FaultTag::F )
                    {
                        EXPECT_EQ( tp.left_tag( e.target ), FaultTag::F );
                    }
                    if ( tp.right_tag( s ) == FaultTag::F )
                    {
                        EXPECT_EQ( tp.right_tag( e.target ), FaultTag::F );
                    }
                    if ( e.move == TwinMove::Joint )
                        EXPECT_TRUE( g.alphabet().observable( e.action ) );
                    else
                        EXPECT_FALSE( g.alphabet().observable( e.action ) );
                }
        }
    }
}

TEST( TwinPlant, SwappedSidesGiveTheSameGraph )
{
    for ( std::uint64_t seed = 0; seed < 80; ++seed )
    {
        auto g = support::random_lts( seed );
        for ( const auto& f : g.alphabet().fault_labels() )
        {
            auto tp = build_twin_plant( g, f, { false, {} } );
            std::set<std::tuple<StateId, StateId, ActionIndex, StateId, StateId>> edges, mirrored;
            for ( StateId s = 0; s < tp.num_states(); ++s )
                for ( const auto& e : tp.out( s ) )
                {
                    auto [ l, r ] = tp.states[ s ];
                    auto [ l2, r2 ] = tp.states[ e.target ];
                    edges.emplace( l, r, e.action, l2, r2 );
                    mirrored.emplace( r, l, e.action, r2, l2 );
                }
            EXPECT_EQ( edges, mirrored );
        }
    }
}

TEST( TwinPlant, RejectsUnobservableCycles )
{
    Alphabet s;
    s.add( "u", ActionKind::Unobservable );
    s.add( "f", ActionKind::Fault );
    auto g = make_lts( s, 2, 0, { { 0, "u", 1 }, { 1, "u", 0 } } );
    EXPECT_THROW( static_cast<void>( build_twin_plant( g, "f" ) ), InputDomainError );
}

TEST( AmbiguousCycle, FixtureProductCD )
{
    auto cd = product( "C", "D" );
    auto tp = build_twin_plant( cd, "f" );
    auto cycle = find_ambiguous_cycle( tp );
    ASSERT_TRUE( cycle );
    for ( const auto& step : cycle->cycle )
        EXPECT_NE( tp.annotated.tag[ step.left ], tp.annotated.tag[ step.right ] );

    // Among the ambiguous components there is the o2 ... o4 ambiguity.
    bool found = false;
    for ( const auto& c : ambiguous_cycles( tp ) )
    {
        auto w = witness_from( tp, c );
        EXPECT_TRUE( validate_witness( cd, "f", w ) );
        auto obs = observe_lasso( w.correct, cd.alphabet() );
        if ( std::get<Lasso>( obs ) == normalize( Lasso{ { "o2" }, { "o4" } } ) )
            found = true;
    }
    EXPECT_TRUE( found );
}

TEST( AmbiguousCycle, AbsentForDiagnosableAndFaultFreeSystems )
{
    EXPECT_FALSE( find_ambiguous_cycle( build_twin_plant( fixture( "A" ), "f" ) ) );
    auto cf = fault_free( fixture( "C" ), "f" );
    EXPECT_FALSE( find_ambiguous_cycle( build_twin_plant( cf, "f" ) ) );
}

TEST( CheckDiagnosable, FixtureVerdicts )
{
    EXPECT_EQ( check_diagnosable( fixture( "A" ), "f" ).status, Status::Diagnosable );
    EXPECT_EQ( check_diagnosable( fixture( "B" ), "f" ).status, Status::Diagnosable );
    EXPECT_EQ( check_diagnosable( fixture( "C" ), "f" ).status, Status::Diagnosable );
    EXPECT_EQ( check_diagnosable( fixture( "D" ), "f" ).status, Status::Diagnosable );
    EXPECT_EQ( check_diagnosable( product( "A", "B" ), "f" ).status, Status::Diagnosable );
    EXPECT_EQ( check_diagnosable( reduced_left( "A", "B" ), "f" ).status, Status::Diagnosable );
    EXPECT_EQ( check_diagnosable( reduced_right( "A", "B" ), "f" ).status, Status::Diagnosable );

    for ( auto g : { product( "C", "D" ), reduced_left( "C", "D" ), reduced_right( "C", "D" ) } )
    {
        auto v = check_diagnosable( g, "f" );
        EXPECT_EQ( v.status, Status::NonDiagnosable ) << g.name();
        ASSERT_TRUE( v.witness );
        EXPECT_TRUE( validate_witness( g, "f", *v.witness ) );
    }
}

TEST( CheckDiagnosable, KnownWitnessPairIsValid )
{
    auto cd = product( "C", "D" );
    Witness listed{ { { "o2", "f", "u2" }, { "o4" } }, { { "o2", "u2" }, { "o4" } } };
    EXPECT_TRUE( validate_witness( cd, "f", listed ) );
    Witness swapped{ listed.correct, listed.faulty };
    EXPECT_FALSE( validate_witness( cd, "f", swapped ) );
    Witness mismatched{ { { "o2", "f", "u2" }, { "o4" } }, { { "o1", "u3" }, { "o5" } } };
    EXPECT_FALSE( validate_witness( cd, "f", mismatched ) );
}

TEST( CheckDiagnosable, DeadStatesAreLeaves )
{
    // A^f x B reaches a deadlock; it is reported but does not affect the verdict.
    auto v = check_diagnosable( reduced_left( "A", "B" ), "f" );
    EXPECT_EQ( v.status, Status::Diagnosable );
    EXPECT_FALSE( v.warnings.empty() );
}

TEST( CheckDiagnosable, WitnessesAlwaysValidateAndSymmetryIsTransparent )
{
    std::size_t non_diagnosable = 0;
    for ( std::uint64_t seed = 0; seed < 300; ++seed )
    {
        auto g = support::random_lts( seed );
        for ( const auto& f : g.alphabet().fault_labels() )
        {
            auto with = check_diagnosable( g, f, { true, {} } );
            auto without = check_diagnosable( g, f, { false, {} } );
            EXPECT_EQ( with.status, without.status ) << "seed " << seed;
            EXPECT_EQ( with.witness.has_value(), with.status == Status::NonDiagnosable );
            if ( with.witness )
            {
                ++non_diagnosable;
                EXPECT_TRUE( validate_witness( g, f, *with.witness ) ) << "seed " << seed;
                EXPECT_TRUE( validate_witness( g, f, *without.witness ) ) << "seed " << seed;
            }
            EXPECT_EQ( check_diagnosable( rename_observables( g ), f ).status, with.status );
        }
    }
    EXPECT_GT( non_diagnosable, 0u );
}

TEST( CheckDiagnosable, DeterministicWitness )
{
    auto a = check_diagnosable( product( "C", "D" ), "f" );
    auto b = check_diagnosable( product( "C", "D" ), "f" );
    EXPECT_EQ( a.witness, b.witness );
}

TEST( CheckDiagnosable, CancellationAndBudget )
{
    std::stop_source stop;
    stop.request_stop();
    auto cancelled = check_diagnosable( product( "C", "D" ), "f", { true, { stop.get_token(), 0 } } );
    EXPECT_EQ( cancelled.status, Status::Inconclusive );
    EXPECT_TRUE( cancelled.cancelled );

    auto capped = check_diagnosable( product( "C", "D" ), "f", { true, { {}, 2 } } );
    EXPECT_EQ( capped.status, Status::Inconclusive );
    EXPECT_TRUE( capped.capped );
}

TEST( CheckAllFaults, EmptyAndSingle )
{
    Alphabet s;
    s.add( "o", ActionKind::Observable );
    auto quiet = make_lts( s, 1, 0, { { 0, "o", 0 } } );
    auto none = check_all_faults( quiet );
    EXPECT_TRUE( none.empty() );
    EXPECT_EQ( overall_status( none ), Status::Diagnosable );

    auto one = check_all_faults( fixture( "C" ) );
    ASSERT_EQ( one.size(), 1u );
    EXPECT_EQ( one.at( "f" ).status, check_diagnosable( fixture( "C" ), "f" ).status );
}

TEST( CheckAllFaults, IdentifiesTheAmbiguousFault )
{
    // f is followed by its own observation; g is indistinguishable from the
    // fault-free branch.
    Alphabet s;
    s.add( "f", ActionKind::Fault );
    s.add( "g", ActionKind::Fault );
    s.add( "u", ActionKind::Unobservable );
    s.add( "a", ActionKind::Observable );
    s.add( "b", ActionKind::Observable );
    auto sys = make_lts( s, 6, 0,
                         { { 0, "f", 1 }, { 1, "b", 1 }, { 0, "g", 2 }, { 2, "a", 3 }, { 3, "a", 3 }, { 0, "u", 4 },
                           { 4, "a", 5 }, { 5, "a", 5 } } );
    auto verdicts = check_all_faults( sys );
    EXPECT_EQ( verdicts.at( "f" ).status, Status::Diagnosable );
    EXPECT_EQ( verdicts.at( "g" ).status, Status::NonDiagnosable );
    EXPECT_EQ( overall_status( verdicts ), Status::NonDiagnosable );
    EXPECT_EQ( brute_force_diagnosable( sys, "f" ).status, Status::Diagnosable );
    EXPECT_EQ( brute_force_diagnosable( sys, "g" ).status, Status::NonDiagnosable );
}
