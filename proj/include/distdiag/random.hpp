#pragma once

// Seeded random systems for property tests and benchmarks.

#include "diagnose.hpp"
#include "errors.hpp"
#include "lts.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace distdiag
{

struct RandomParams
{
    std::size_t components = 2;          ///< 1..16
    std::size_t min_states = 2;          ///< >= 1
    std::size_t max_states = 6;          ///< min_states..30
    std::size_t shared_observables = 3;  ///< pool o0, o1, ... (each component draws a subset)
    std::size_t private_observables = 1; ///< p<i>_<k> per component
    std::size_t private_unobservables = 1; ///< u<i>_<k> per component
    std::size_t fault_classes = 1;       ///< f0, f1, ...
    double fault_probability = 0.25;     ///< chance that a transition is a fault; 0 disables faults
    double extra_transitions = 1.0;      ///< extra transitions per state, beyond the spanning tree
    bool diagnosable_only = false;       ///< reject components that are not diagnosable
    std::size_t rejection_budget = 2000; ///< attempts per component
};

namespace detail
{

inline void check_params( const RandomParams& p )
{
    if ( p.components < 1 || p.components > 16 )
        throw InputDomainError( "components must lie in 1..16" );
    if ( p.min_states < 1 || p.min_states > p.max_states || p.max_states > 30 )
        throw InputDomainError( "state counts must satisfy 1 <= min <= max <= 30" );
    if ( p.fault_probability < 0.0 || p.fault_probability > 1.0 )
        throw InputDomainError( "fault probability must lie in [0, 1]" );
    if ( p.extra_transitions < 0.0 || p.extra_transitions > 8.0 )
        throw InputDomainError( "extra transitions must lie in [0, 8]" );
    if ( p.rejection_budget == 0 )
        throw InputDomainError( "rejection budget must be positive" );
}

[[nodiscard]] inline Lts random_component( std::mt19937_64& rng, const RandomParams& p, std::size_t index )
{
    auto coin = [ & ]( double prob ) { return std::bernoulli_distribution( prob )( rng ); };
    auto pick = [ & ]( std::size_t n ) { return std::uniform_int_distribution<std::size_t>( 0, n - 1 )( rng ); };
    const auto tag = std::to_string( index );

    Alphabet sigma;
    std::vector<ActionIndex> observable, unobservable, faults;
    for ( std::size_t k = 0; k < p.shared_observables; ++k )
        if ( coin( 0.7 ) )
            observable.push_back( sigma.add( "o" + std::to_string( k ), ActionKind::Observable ) );
    for ( std::size_t k = 0; k < p.private_observables; ++k )
        observable.push_back( sigma.add( "p" + tag + "_" + std::to_string( k ), ActionKind::Observable ) );
    if ( observable.empty() )
        observable.push_back( sigma.add( "p" + tag + "_0", ActionKind::Observable ) );
    for ( std::size_t k = 0; k < p.private_unobservables; ++k )
        unobservable.push_back( sigma.add( "u" + tag + "_" + std::to_string( k ), ActionKind::Unobservable ) );
    if ( p.fault_probability > 0.0 )
        for ( std::size_t k = 0; k < p.fault_classes; ++k )
            if ( coin( 0.75 ) )
                faults.push_back( sigma.add( "f" + std::to_string( k ), ActionKind::Fault ) );

    auto label = [ & ] {
        if ( !faults.empty() && coin( p.fault_probability ) )
            return faults[ pick( faults.size() ) ];
        auto choices = observable.size() + unobservable.size();
        auto c = pick( choices );
        return c < observable.size() ? observable[ c ] : unobservable[ c - observable.size() ];
    };

    const auto n = p.min_states + pick( p.max_states - p.min_states + 1 );
    std::vector<Transition> edges;
    for ( std::size_t s = 1; s < n; ++s )
        edges.push_back( { static_cast<StateId>( pick( s ) ), label(), static_cast<StateId>( s ) } );
    const auto extra = static_cast<std::size_t>( p.extra_transitions * static_cast<double>( n ) + 0.5 );
    for ( std::size_t k = 0; k < extra; ++k )
        edges.push_back( { static_cast<StateId>( pick( n ) ), label(), static_cast<StateId>( pick( n ) ) } );

    // Relabel unobservable edges that would close an unobservable cycle.
    std::vector<std::vector<StateId>> silent( n );
    auto silent_path = [ & ]( StateId from, StateId to ) {
        std::vector<bool> seen( n, false );
        std::vector<StateId> stack{ from };
        seen[ from ] = true;
        while ( !stack.empty() )
        {
            auto s = stack.back();
            stack.pop_back();
            if ( s == to )
                return true;
            for ( auto t : silent[ s ] )
                if ( !seen[ t ] )
                {
                    seen[ t ] = true;
                    stack.push_back( t );
                }
        }
        return false;
    };
    for ( auto& e : edges )
    {
        if ( sigma.observable( e.action ) )
            continue;
        if ( silent_path( e.target, e.source ) )
            e.action = observable[ pick( observable.size() ) ];
        else
            silent[ e.source ].push_back( e.target );
    }

    std::vector<bool> has_out( n, false );
    for ( const auto& e : edges )
        has_out[ e.source ] = true;
    for ( std::size_t s = 0; s < n; ++s )
        if ( !has_out[ s ] )
            edges.push_back( { static_cast<StateId>( s ), observable[ pick( observable.size() ) ], static_cast<StateId>( s ) } );

    return Lts( std::move( sigma ), n, 0, std::move( edges ), "G" + tag );
}

} // namespace detail

/// Live components without unobservable cycles, fully reachable, and a pure
/// function of `seed` and `params`.
[[nodiscard]] inline std::vector<Lts> generate_random_system( std::uint64_t seed, const RandomParams& params = {} )
{
    detail::check_params( params );
    std::mt19937_64 rng( seed );
    std::vector<Lts> out;
    for ( std::size_t i = 0; i < params.components; ++i )
    {
        for ( std::size_t attempt = 0;; ++attempt )
        {
            if ( attempt == params.rejection_budget )
                throw Error( "rejection budget exhausted for component " + std::to_string( i ) );
            auto c = detail::random_component( rng, params, i );
            if ( params.diagnosable_only && overall_status( check_all_faults( c ) ) != Status::Diagnosable )
                continue;
            out.push_back( std::move( c ) );
            break;
        }
    }
    return out;
}

} // namespace distdiag
