#pragma once

// Isomorphism of LTSs: a bijection of states that preserves the initial
// state and every labeled transition. Alphabets must match exactly.

#include "lts.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <tuple>
#include <vector>

namespace distdiag
{

namespace detail
{

/// Colour refinement run on both systems at once, so colours are comparable.
/// Actions of `b` are expected to be already translated to `a`'s indices.
[[nodiscard]] inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
refine_colours( const Lts& a, const std::vector<Transition>& b_edges, std::size_t b_states, StateId b_initial )
{
    const std::size_t na = a.num_states();
    std::vector<std::size_t> colour( na + b_states, 0 );
    std::vector<std::vector<std::pair<ActionIndex, std::size_t>>> out( na + b_states ), in( na + b_states );
    for ( const auto& t : a.transitions() )
    {
        out[ t.source ].emplace_back( t.action, t.target );
        in[ t.target ].emplace_back( t.action, t.source );
    }
    for ( const auto& t : b_edges )
    {
        out[ na + t.source ].emplace_back( t.action, na + t.target );
        in[ na + t.target ].emplace_back( t.action, na + t.source );
    }
    colour[ a.initial() ] = 1;
    colour[ na + b_initial ] = 1;

    std::size_t classes = 0;
    while ( true )
    {
        using Signature = std::tuple<std::size_t, std::vector<std::pair<ActionIndex, std::size_t>>,
                                     std::vector<std::pair<ActionIndex, std::size_t>>>;
        std::map<Signature, std::size_t> ids;
        std::vector<std::size_t> next( colour.size() );
        for ( std::size_t v = 0; v < colour.size(); ++v )
        {
            Signature sig;
            std::get<0>( sig ) = colour[ v ];
            for ( auto [ act, w ] : out[ v ] )
                std::get<1>( sig ).emplace_back( act, colour[ w ] );
            for ( auto [ act, w ] : in[ v ] )
                std::get<2>( sig ).emplace_back( act, colour[ w ] );
            std::sort( std::get<1>( sig ).begin(), std::get<1>( sig ).end() );
            std::sort( std::get<2>( sig ).begin(), std::get<2>( sig ).end() );
            next[ v ] = ids.emplace( std::move( sig ), ids.size() ).first->second;
        }
        colour = std::move( next );
        if ( ids.size() == classes )
            break;
        classes = ids.size();
    }
    return { std::vector<std::size_t>( colour.begin(), colour.begin() + static_cast<std::ptrdiff_t>( na ) ),
             std::vector<std::size_t>( colour.begin() + static_cast<std::ptrdiff_t>( na ), colour.end() ) };
}

} // namespace detail

/// State mapping from `a` to `b`, if the two systems are isomorphic.
[[nodiscard]] inline std::optional<std::vector<StateId>> find_isomorphism( const Lts& a, const Lts& b )
{
    if ( a.num_states() != b.num_states() || a.num_transitions() != b.num_transitions() ||
         !( a.alphabet() == b.alphabet() ) )
        return std::nullopt;

    std::vector<Transition> b_edges;
    for ( const auto& t : b.transitions() )
        b_edges.push_back( { t.source, *a.alphabet().find( b.alphabet().label( t.action ) ), t.target } );
    std::sort( b_edges.begin(), b_edges.end() );
    auto b_has = [ & ]( StateId s, ActionIndex act, StateId t ) {
        return std::binary_search( b_edges.begin(), b_edges.end(), Transition{ s, act, t } );
    };

    auto [ ca, cb ] = detail::refine_colours( a, b_edges, b.num_states(), b.initial() );
    {
        auto sa = ca, sb = cb;
        std::sort( sa.begin(), sa.end() );
        std::sort( sb.begin(), sb.end() );
        if ( sa != sb )
            return std::nullopt;
    }

    const std::size_t n = a.num_states();
    std::vector<std::vector<std::pair<ActionIndex, StateId>>> b_out( n ), b_in( n ), a_in( n );
    for ( const auto& t : b_edges )
    {
        b_out[ t.source ].emplace_back( t.action, t.target );
        b_in[ t.target ].emplace_back( t.action, t.source );
    }
    for ( const auto& t : a.transitions() )
        a_in[ t.target ].emplace_back( t.action, t.source );

    // Assign the initial state first, then the others in BFS order.
    std::vector<StateId> order{ a.initial() };
    {
        std::vector<bool> seen( n, false );
        seen[ a.initial() ] = true;
        for ( std::size_t h = 0; h < order.size(); ++h )
            for ( const auto& e : a.out( order[ h ] ) )
                if ( !seen[ e.target ] )
                {
                    seen[ e.target ] = true;
                    order.push_back( e.target );
                }
        for ( StateId s = 0; s < n; ++s )
            if ( !seen[ s ] )
                order.push_back( s );
    }

    std::vector<StateId> map( n, no_state ), inverse( n, no_state );
    auto consistent = [ & ]( StateId v, StateId w ) {
        for ( const auto& e : a.out( v ) )
        {
            auto img = e.target == v ? w : map[ e.target ];
            if ( img != no_state && !b_has( w, e.action, img ) )
                return false;
        }
        for ( auto [ act, src ] : a_in[ v ] )
            if ( map[ src ] != no_state && !b_has( map[ src ], act, w ) )
                return false;
        for ( auto [ act, tgt ] : b_out[ w ] )
        {
            auto pre = tgt == w ? v : inverse[ tgt ];
            if ( pre != no_state && !a.has_transition( v, act, pre ) )
                return false;
        }
        for ( auto [ act, src ] : b_in[ w ] )
            if ( inverse[ src ] != no_state && !a.has_transition( inverse[ src ], act, v ) )
                return false;
        return true;
    };

    std::vector<std::vector<StateId>> by_colour;
    for ( StateId s = 0; s < n; ++s )
    {
        if ( cb[ s ] >= by_colour.size() )
            by_colour.resize( cb[ s ] + 1 );
        by_colour[ cb[ s ] ].push_back( s );
    }

    // Iterative backtracking over `order`.
    std::vector<std::size_t> cursor( n, 0 );
    std::size_t depth = 0;
    while ( true )
    {
        if ( depth == n )
            return map;
        auto v = order[ depth ];
        const auto& candidates = by_colour[ ca[ v ] ];
        bool placed = false;
        while ( cursor[ depth ] < candidates.size() )
        {
            auto w = candidates[ cursor[ depth ]++ ];
            if ( inverse[ w ] != no_state || !consistent( v, w ) )
                continue;
            map[ v ] = w;
            inverse[ w ] = v;
            placed = true;
            break;
        }
        if ( placed )
        {
            ++depth;
            if ( depth < n )
                cursor[ depth ] = 0;
            continue;
        }
        if ( depth == 0 )
            return std::nullopt;
        --depth;
        auto u = order[ depth ];
        inverse[ map[ u ] ] = no_state;
        map[ u ] = no_state;
    }
}

[[nodiscard]] inline bool isomorphic( const Lts& a, const Lts& b )
{
    return find_isomorphism( a, b ).has_value();
}

} // namespace distdiag
