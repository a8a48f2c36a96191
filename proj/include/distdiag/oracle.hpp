#pragma once

// Brute-force diagnosability oracle, used to cross-check the twin plant.
//
// It enumerates candidate observations u·v^ω explicitly: prefixes u through
// the (deterministic) observer of the fault-tagged system, one representative
// per observer state, and cycles v as Lyndon words up to a length bound. For
// each candidate it searches, in the product of the system with the word
// lasso, for one infinite run that contains the fault and one that does not.
// Finding both proves non-diagnosability; finding none is conclusive only up
// to the cycle-length bound.

#include "diagnose.hpp"
#include "errors.hpp"
#include "lts.hpp"

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace distdiag
{

struct OracleOptions
{
    std::size_t max_states = 12;      ///< larger systems yield Inconclusive
    std::size_t max_cycle_length = 0; ///< 0: number of states + 2
};

namespace detail
{

class OracleSearch
{
public:
    OracleSearch( const Lts& lts, ActionIndex fault ) : _lts{ lts }, _fault{ fault }, _n{ lts.num_states() }
    {
        for ( ActionIndex a = 0; a < lts.alphabet().size(); ++a )
            if ( lts.alphabet().observable( a ) )
                _letters.push_back( a );
        std::sort( _letters.begin(), _letters.end(), [ & ]( ActionIndex x, ActionIndex y ) {
            return lts.alphabet().label( x ) < lts.alphabet().label( y );
        } );
    }

    using Set = std::uint32_t; // bit 2q+t: state q with tag t (t = 1: faulty)

    [[nodiscard]] Set closure( Set x ) const
    {
        std::vector<std::size_t> work;
        for ( std::size_t b = 0; b < 2 * _n; ++b )
            if ( x >> b & 1u )
                work.push_back( b );
        while ( !work.empty() )
        {
            auto b = work.back();
            work.pop_back();
            auto q = static_cast<StateId>( b / 2 );
            auto t = b % 2;
            for ( const auto& e : _lts.out( q ) )
            {
                if ( _lts.alphabet().observable( e.action ) )
                    continue;
                auto nb = 2 * e.target + ( e.action == _fault ? 1 : t );
                if ( !( x >> nb & 1u ) )
                {
                    x |= Set{ 1 } << nb;
                    work.push_back( nb );
                }
            }
        }
        return x;
    }

    [[nodiscard]] Set post( Set x, ActionIndex letter ) const
    {
        Set y = 0;
        for ( std::size_t b = 0; b < 2 * _n; ++b )
            if ( x >> b & 1u )
                for ( const auto& e : _lts.out( static_cast<StateId>( b / 2 ), letter ) )
                    y |= Set{ 1 } << ( 2 * e.target + b % 2 );
        return closure( y );
    }

    [[nodiscard]] bool has_correct( Set x ) const
    {
        Set mask = 0;
        for ( std::size_t q = 0; q < _n; ++q )
            mask |= Set{ 1 } << ( 2 * q );
        return ( x & mask ) != 0;
    }

    /// Lasso run of the system over u·v^ω; `faulty` selects runs that
    /// contain the fault, otherwise runs that avoid it.
    [[nodiscard]] std::optional<Lasso> run( const std::vector<ActionIndex>& word, std::size_t loop_start,
                                            bool faulty ) const
    {
        const std::size_t len = word.size();
        const std::size_t nodes = 2 * _n * len;
        auto node = [ & ]( std::size_t b, std::size_t p ) { return b * len + p; };
        struct Arc
        {
            std::size_t to;
            ActionIndex action;
        };
        auto arcs = [ & ]( std::size_t v ) {
            std::vector<Arc> out;
            auto b = v / len, p = v % len;
            auto q = static_cast<StateId>( b / 2 );
            auto t = b % 2;
            for ( const auto& e : _lts.out( q ) )
            {
                auto nt = e.action == _fault ? 1 : t;
                if ( !faulty && nt == 1 )
                    continue;
                auto nb = 2 * e.target + nt;
                if ( !_lts.alphabet().observable( e.action ) )
                    out.push_back( { node( nb, p ), e.action } );
                else if ( e.action == word[ p ] )
                    out.push_back( { node( nb, p + 1 == len ? loop_start : p + 1 ), e.action } );
            }
            return out;
        };

        // Forward reachability with parents.
        const std::size_t root = node( 2 * _lts.initial(), 0 );
        std::vector<std::size_t> parent( nodes, SIZE_MAX );
        std::vector<ActionIndex> parent_action( nodes, 0 );
        std::vector<bool> reached( nodes, false );
        std::vector<std::size_t> queue{ root };
        reached[ root ] = true;
        for ( std::size_t h = 0; h < queue.size(); ++h )
            for ( const auto& a : arcs( queue[ h ] ) )
                if ( !reached[ a.to ] )
                {
                    reached[ a.to ] = true;
                    parent[ a.to ] = queue[ h ];
                    parent_action[ a.to ] = a.action;
                    queue.push_back( a.to );
                }

        // Nodes that can run forever inside the accepted region (faulty
        // nodes only when looking for a faulty run).
        auto in_region = [ & ]( std::size_t v ) { return reached[ v ] && ( !faulty || ( v / len ) % 2 == 1 ); };
        std::vector<bool> alive( nodes, false );
        for ( std::size_t v = 0; v < nodes; ++v )
            alive[ v ] = in_region( v );
        for ( bool changed = true; changed; )
        {
            changed = false;
            for ( std::size_t v = 0; v < nodes; ++v )
            {
                if ( !alive[ v ] )
                    continue;
                auto out = arcs( v );
                if ( std::none_of( out.begin(), out.end(), [ & ]( const Arc& a ) { return alive[ a.to ]; } ) )
                {
                    alive[ v ] = false;
                    changed = true;
                }
            }
        }
        std::size_t entry = SIZE_MAX;
        for ( auto v : queue )
            if ( alive[ v ] )
            {
                entry = v;
                break;
            }
        if ( entry == SIZE_MAX )
            return std::nullopt;

        // Walk inside the alive region until a node repeats.
        std::vector<std::size_t> walk{ entry };
        std::vector<ActionIndex> walk_actions;
        std::vector<std::size_t> seen_at( nodes, SIZE_MAX );
        seen_at[ entry ] = 0;
        while ( true )
        {
            auto out = arcs( walk.back() );
            auto next = std::find_if( out.begin(), out.end(), [ & ]( const Arc& a ) { return alive[ a.to ]; } );
            walk_actions.push_back( next->action );
            if ( seen_at[ next->to ] != SIZE_MAX )
            {
                auto loop_at = seen_at[ next->to ];
                Lasso lasso;
                std::vector<std::string> to_entry;
                for ( auto v = entry; v != root; v = parent[ v ] )
                    to_entry.push_back( _lts.alphabet().label( parent_action[ v ] ) );
                lasso.prefix.assign( to_entry.rbegin(), to_entry.rend() );
                for ( std::size_t k = 0; k < walk_actions.size(); ++k )
                    ( k < loop_at ? lasso.prefix : lasso.cycle ).push_back( _lts.alphabet().label( walk_actions[ k ] ) );
                return lasso;
            }
            seen_at[ next->to ] = walk.size();
            walk.push_back( next->to );
        }
    }

    [[nodiscard]] static bool is_lyndon( const std::vector<ActionIndex>& w )
    {
        for ( std::size_t r = 1; r < w.size(); ++r )
        {
            // Compare w with its rotation starting at r.
            for ( std::size_t k = 0; k < w.size(); ++k )
            {
                auto a = w[ k ], b = w[ ( r + k ) % w.size() ];
                if ( a < b )
                    break;
                if ( a > b || k + 1 == w.size() )
                    return false;
            }
        }
        return true;
    }

    std::optional<Witness> search( std::size_t max_cycle )
    {
        // Observer states with one representative prefix each.
        std::unordered_map<Set, std::vector<ActionIndex>> prefix_of;
        std::vector<Set> order;
        Set start = closure( Set{ 1 } << ( 2 * _lts.initial() ) );
        prefix_of.emplace( start, std::vector<ActionIndex>{} );
        order.push_back( start );
        for ( std::size_t h = 0; h < order.size(); ++h )
        {
            auto x = order[ h ];
            for ( auto letter : _letters )
            {
                auto y = post( x, letter );
                if ( !has_correct( y ) || prefix_of.count( y ) )
                    continue;
                auto word = prefix_of.at( x );
                word.push_back( letter );
                prefix_of.emplace( y, std::move( word ) );
                order.push_back( y );
            }
        }
        for ( auto x : order )
        {
            std::vector<ActionIndex> cycle;
            if ( auto w = cycles_from( x, prefix_of.at( x ), cycle, max_cycle ) )
                return w;
        }
        return std::nullopt;
    }

    [[nodiscard]] std::size_t candidates() const noexcept { return _candidates; }

private:
    std::optional<Witness> cycles_from( Set x, const std::vector<ActionIndex>& prefix,
                                        std::vector<ActionIndex>& cycle, std::size_t max_cycle )
    {
        if ( !cycle.empty() && is_lyndon( cycle ) )
        {
            ++_candidates;
            std::vector<ActionIndex> word = prefix;
            word.insert( word.end(), cycle.begin(), cycle.end() );
            if ( auto correct = run( word, prefix.size(), false ) )
                if ( auto faulty = run( word, prefix.size(), true ) )
                    return Witness{ std::move( *faulty ), std::move( *correct ) };
        }
        if ( cycle.size() == max_cycle )
            return std::nullopt;
        for ( auto letter : _letters )
        {
            auto y = post( x, letter );
            if ( !has_correct( y ) )
                continue;
            cycle.push_back( letter );
            auto found = cycles_from( y, prefix, cycle, max_cycle );
            cycle.pop_back();
            if ( found )
                return found;
        }
        return std::nullopt;
    }

    const Lts& _lts;
    ActionIndex _fault;
    std::size_t _n;
    std::vector<ActionIndex> _letters;
    std::size_t _candidates = 0;
};

} // namespace detail

/// Independent, exponential-time diagnosability check for small systems.
[[nodiscard]] inline Verdict brute_force_diagnosable( const Lts& lts, std::string_view fault,
                                                      const OracleOptions& options = {} )
{
    const auto start = std::chrono::steady_clock::now();
    Verdict verdict;
    verdict.fault = std::string( fault );
    verdict.stats.subject_states = lts.num_states();
    verdict.stats.subject_transitions = lts.num_transitions();
    auto f = detail::declared_fault( lts, fault );
    if ( lts.num_states() > options.max_states || 2 * lts.num_states() > 32 )
    {
        verdict.status = Status::Inconclusive;
        verdict.warnings.push_back( "system exceeds the oracle state bound" );
        return verdict;
    }
    if ( auto cycles = validate_no_unobservable_cycles( lts ); !cycles )
        throw InputDomainError( "oracle needs a system without unobservable cycles (" + cycles.message + ")" );

    const auto bound = options.max_cycle_length ? options.max_cycle_length : lts.num_states() + 2;
    detail::OracleSearch search( lts, f );
    if ( auto witness = search.search( bound ) )
    {
        verdict.status = Status::NonDiagnosable;
        verdict.witness = std::move( witness );
    }
    else
        verdict.status = Status::Diagnosable;
    verdict.stats.twin_states = search.candidates();
    verdict.stats.seconds = std::chrono::duration<double>( std::chrono::steady_clock::now() - start ).count();
    return verdict;
}

} // namespace distdiag
