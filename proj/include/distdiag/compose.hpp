#pragma once

// Synchronous product of LTS components and projection of product paths and
// traces back onto a component.
//
// Shared observable actions synchronize every component whose alphabet
// contains them. Private actions move their owner alone. A fault label
// present in several components does not synchronize: each occurrence moves
// exactly one component. Sharing a non-fault unobservable label is rejected.

#include "errors.hpp"
#include "lts.hpp"

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace distdiag
{

/// Product LTS together with its factors and the per-state coordinates.
struct ProductLts
{
    Lts lts;
    std::vector<Lts> factors;
    std::vector<StateId> coords; ///< row-major, `arity()` entries per product state

    [[nodiscard]] std::size_t arity() const noexcept { return factors.size(); }

    [[nodiscard]] std::span<const StateId> state( StateId s ) const
    {
        return { coords.data() + static_cast<std::size_t>( s ) * arity(), arity() };
    }

    /// Factors containing `a` (a product action index), as (factor, local index).
    [[nodiscard]] std::vector<std::pair<std::size_t, ActionIndex>> participants( ActionIndex a ) const
    {
        std::vector<std::pair<std::size_t, ActionIndex>> out;
        const auto& label = lts.alphabet().label( a );
        for ( std::size_t c = 0; c < factors.size(); ++c )
            if ( auto local = factors[ c ].alphabet().find( label ) )
                out.emplace_back( c, *local );
        return out;
    }
};

namespace detail
{

struct GlobalAction
{
    ActionKind kind;
    std::vector<std::pair<std::size_t, ActionIndex>> participants;
};

struct MergedAlphabet
{
    Alphabet alphabet;
    std::vector<GlobalAction> actions;
};

[[nodiscard]] inline MergedAlphabet merge_alphabets( std::span<const Lts> components )
{
    MergedAlphabet merged;
    for ( std::size_t c = 0; c < components.size(); ++c )
    {
        const auto& sigma = components[ c ].alphabet();
        for ( ActionIndex a = 0; a < sigma.size(); ++a )
        {
            ActionIndex global = 0;
            try
            {
                global = merged.alphabet.add( sigma.label( a ), sigma.kind( a ) );
            }
            catch ( const InputDomainError& e )
            {
                throw CompositionError( "inconsistent alphabet partitions: " + std::string( e.what() ) );
            }
            if ( global == merged.actions.size() )
                merged.actions.push_back( { sigma.kind( a ), {} } );
            auto& action = merged.actions[ global ];
            if ( action.kind == ActionKind::Unobservable && !action.participants.empty() )
                throw CompositionError( "unobservable action '" + sigma.label( a ) +
                                        "' is shared by several components" );
            action.participants.emplace_back( c, a );
        }
    }
    return merged;
}

[[nodiscard]] inline std::string product_name( std::span<const Lts> components )
{
    std::string name;
    for ( const auto& c : components )
    {
        if ( !name.empty() )
            name += " x ";
        name += c.name().empty() ? "?" : c.name();
    }
    return name;
}

} // namespace detail

/// Reachable n-ary synchronous product, explored breadth-first from the tuple
/// of initial states. State numbering follows discovery order, so it is
/// stable for identical inputs.
[[nodiscard]] inline ProductLts sync_product_n( std::span<const Lts> components, const ExploreLimits& limits = {} )
{
    if ( components.empty() )
        throw InputDomainError( "a product needs at least one component" );
    auto merged = detail::merge_alphabets( components );
    const std::size_t arity = components.size();

    std::vector<std::uint64_t> radix( arity, 1 );
    {
        unsigned __int128 span = 1;
        for ( std::size_t c = 0; c < arity; ++c )
        {
            radix[ c ] = static_cast<std::uint64_t>( span );
            span *= components[ c ].num_states();
            if ( span > std::numeric_limits<std::uint64_t>::max() )
                throw CompositionError( "product state space too large to index" );
        }
    }

    ProductLts product;
    product.factors.assign( components.begin(), components.end() );
    std::unordered_map<std::uint64_t, StateId> index;
    std::vector<Transition> transitions;

    auto intern = [ & ]( const std::vector<StateId>& tuple ) -> StateId {
        std::uint64_t key = 0;
        for ( std::size_t c = 0; c < arity; ++c )
            key += radix[ c ] * tuple[ c ];
        auto [ it, inserted ] = index.try_emplace( key, static_cast<StateId>( index.size() ) );
        if ( inserted )
        {
            limits.poll( index.size() );
            product.coords.insert( product.coords.end(), tuple.begin(), tuple.end() );
        }
        return it->second;
    };

    std::vector<StateId> tuple( arity );
    for ( std::size_t c = 0; c < arity; ++c )
        tuple[ c ] = components[ c ].initial();
    intern( tuple );

    std::vector<StateId> current( arity );
    std::vector<std::span<const Edge>> choices;
    std::vector<std::size_t> odometer;
    for ( StateId s = 0; s < index.size(); ++s )
    {
        std::copy_n( product.coords.begin() + static_cast<std::ptrdiff_t>( s * arity ), arity, current.begin() );
        for ( ActionIndex a = 0; a < merged.actions.size(); ++a )
        {
            const auto& action = merged.actions[ a ];
            if ( action.kind == ActionKind::Fault )
            {
                for ( const auto& [ c, local ] : action.participants )
                    for ( const auto& e : components[ c ].out( current[ c ], local ) )
                    {
                        tuple = current;
                        tuple[ c ] = e.target;
                        transitions.push_back( { s, a, intern( tuple ) } );
                    }
                continue;
            }
            choices.clear();
            bool enabled = true;
            for ( const auto& [ c, local ] : action.participants )
            {
                auto edges = components[ c ].out( current[ c ], local );
                if ( edges.empty() )
                {
                    enabled = false;
                    break;
                }
                choices.push_back( edges );
            }
            if ( !enabled )
                continue;
            odometer.assign( choices.size(), 0 );
            while ( true )
            {
                tuple = current;
                for ( std::size_t k = 0; k < choices.size(); ++k )
                    tuple[ action.participants[ k ].first ] = choices[ k ][ odometer[ k ] ].target;
                transitions.push_back( { s, a, intern( tuple ) } );
                std::size_t k = 0;
                while ( k < choices.size() && ++odometer[ k ] == choices[ k ].size() )
                    odometer[ k++ ] = 0;
                if ( k == choices.size() )
                    break;
            }
        }
    }
    product.lts = Lts( std::move( merged.alphabet ), index.size(), 0, std::move( transitions ),
                       detail::product_name( components ) );
    return product;
}

[[nodiscard]] inline ProductLts sync_product_n( const std::vector<Lts>& components, const ExploreLimits& limits = {} )
{
    return sync_product_n( std::span<const Lts>( components ), limits );
}

[[nodiscard]] inline ProductLts sync_product( const Lts& g1, const Lts& g2, const ExploreLimits& limits = {} )
{
    return sync_product_n( std::vector<Lts>{ g1, g2 }, limits );
}

/// A finite path: start state followed by (action, target) steps.
struct Path
{
    StateId start = 0;
    std::vector<Edge> steps;
};

[[nodiscard]] inline Trace trace_of( const Lts& lts, const Path& path )
{
    Trace out;
    for ( const auto& step : path.steps )
        out.push_back( lts.alphabet().label( step.action ) );
    return out;
}

/// Alternative sets of factors that may have produced the product step
/// s --a--> t. Synchronized and private steps have one alternative; a
/// fault step has one per factor that could have fired it.
[[nodiscard]] inline std::vector<std::vector<std::size_t>> step_movers( const ProductLts& product, StateId s,
                                                                       ActionIndex a, StateId t )
{
    auto from = product.state( s );
    auto to = product.state( t );
    auto parts = product.participants( a );
    std::vector<std::vector<std::size_t>> out;
    if ( product.lts.alphabet().kind( a ) != ActionKind::Fault )
    {
        std::vector<std::size_t> all;
        for ( const auto& [ c, local ] : parts )
        {
            if ( !product.factors[ c ].has_transition( from[ c ], local, to[ c ] ) )
                return out;
            all.push_back( c );
        }
        for ( std::size_t c = 0; c < product.arity(); ++c )
            if ( std::find( all.begin(), all.end(), c ) == all.end() && from[ c ] != to[ c ] )
                return out;
        out.push_back( std::move( all ) );
        return out;
    }
    for ( const auto& [ c, local ] : parts )
    {
        bool others_still = true;
        for ( std::size_t d = 0; d < product.arity(); ++d )
            if ( d != c && from[ d ] != to[ d ] )
                others_still = false;
        if ( others_still && product.factors[ c ].has_transition( from[ c ], local, to[ c ] ) )
            out.push_back( { c } );
    }
    return out;
}

/// Restriction of a product path to the steps in which component `i` moved.
/// A fault step that several components could have fired (all of them on a
/// self-loop) is attributed to the lowest such component.
[[nodiscard]] inline Path project_path( const ProductLts& product, const Path& path, std::size_t i )
{
    if ( i >= product.arity() )
        throw InputDomainError( "component index out of range" );
    if ( path.start >= product.lts.num_states() )
        throw InputDomainError( "invalid path: start state out of range" );
    const auto& local_sigma = product.factors[ i ].alphabet();
    Path out{ product.state( path.start )[ i ], {} };
    StateId s = path.start;
    for ( const auto& step : path.steps )
    {
        if ( step.target >= product.lts.num_states() || !product.lts.has_transition( s, step.action, step.target ) )
            throw InputDomainError( "invalid path: missing product transition" );
        auto movers = step_movers( product, s, step.action, step.target );
        if ( movers.empty() )
            throw InputDomainError( "invalid path: step not produced by the factors" );
        const auto& chosen = movers.front();
        if ( std::find( chosen.begin(), chosen.end(), i ) != chosen.end() )
            out.steps.push_back(
                    { local_sigma.at( product.lts.alphabet().label( step.action ) ), product.state( step.target )[ i ] } );
        s = step.target;
    }
    return out;
}

using ProjectedTrace = std::variant<Lasso, Trace>;

/// All projections onto component `i` of the product paths labeled by the
/// finite trace `sigma`.
[[nodiscard]] inline std::set<Trace> project_trace( const ProductLts& product, const Trace& sigma, std::size_t i )
{
    if ( i >= product.arity() )
        throw InputDomainError( "component index out of range" );
    const auto& sigma_alpha = product.lts.alphabet();
    std::vector<ActionIndex> word;
    for ( const auto& label : sigma )
        word.push_back( sigma_alpha.at( label ) );

    std::set<Trace> results;
    std::set<std::tuple<std::size_t, StateId, Trace>> visited;
    struct Frame
    {
        std::size_t pos;
        StateId state;
        Trace projected;
    };
    std::vector<Frame> stack{ { 0, product.lts.initial(), {} } };
    while ( !stack.empty() )
    {
        auto frame = std::move( stack.back() );
        stack.pop_back();
        if ( !visited.emplace( frame.pos, frame.state, frame.projected ).second )
            continue;
        if ( frame.pos == word.size() )
        {
            results.insert( frame.projected );
            continue;
        }
        auto a = word[ frame.pos ];
        for ( const auto& e : product.lts.out( frame.state, a ) )
            for ( const auto& movers : step_movers( product, frame.state, a, e.target ) )
            {
                Trace next = frame.projected;
                if ( std::find( movers.begin(), movers.end(), i ) != movers.end() )
                    next.push_back( sigma[ frame.pos ] );
                stack.push_back( { frame.pos + 1, e.target, std::move( next ) } );
            }
    }
    if ( results.empty() )
        throw InputDomainError( "trace is not realizable in the product" );
    return results;
}

/// Projections onto component `i` of the lasso-shaped product paths labeled
/// by prefix · cycle^ω. A path is closed the first time it revisits a state
/// at a cycle boundary; at most `max_unrolling` cycle iterations are explored
/// (default: twice the product state count). Projections whose loop part is
/// empty degenerate to finite traces. Lassos are returned normalized.
[[nodiscard]] inline std::set<ProjectedTrace> project_trace( const ProductLts& product, const Lasso& sigma,
                                                             std::size_t i, std::size_t max_unrolling = 0 )
{
    if ( i >= product.arity() )
        throw InputDomainError( "component index out of range" );
    if ( sigma.cycle.empty() )
        throw InputDomainError( "lasso cycle must be non-empty" );
    if ( !accepts( product.lts, sigma ) )
        throw InputDomainError( "lasso is not realizable in the product" );
    if ( max_unrolling == 0 )
        max_unrolling = 2 * product.lts.num_states();

    const auto& alpha = product.lts.alphabet();
    Trace word = sigma.prefix;
    word.insert( word.end(), sigma.cycle.begin(), sigma.cycle.end() );
    std::vector<ActionIndex> letters;
    for ( const auto& label : word )
        letters.push_back( alpha.at( label ) );
    const std::size_t boundary = sigma.prefix.size();
    const std::size_t max_steps = boundary + max_unrolling * sigma.cycle.size();

    std::set<ProjectedTrace> results;
    // Current path: product states at each depth and the projected labels
    // emitted by each step.
    std::vector<StateId> states{ product.lts.initial() };
    std::vector<std::optional<std::string>> emitted;

    auto close_loop = [ & ]( std::size_t loop_start ) {
        Trace prefix, cycle;
        for ( std::size_t k = 0; k < emitted.size(); ++k )
            if ( emitted[ k ] )
                ( k < loop_start ? prefix : cycle ).push_back( *emitted[ k ] );
        if ( cycle.empty() )
            results.insert( prefix );
        else
            results.insert( normalize( Lasso{ std::move( prefix ), std::move( cycle ) } ) );
    };

    auto position = [ & ]( std::size_t depth ) {
        return depth < boundary ? depth : boundary + ( depth - boundary ) % sigma.cycle.size();
    };

    std::function<void()> extend = [ & ]() {
        const std::size_t depth = emitted.size();
        const StateId s = states.back();
        if ( depth >= boundary && position( depth ) == boundary )
        {
            for ( std::size_t d = boundary; d < depth; d += sigma.cycle.size() )
                if ( states[ d ] == s )
                {
                    close_loop( d );
                    return;
                }
        }
        if ( depth >= max_steps )
            return;
        const auto pos = position( depth );
        const auto a = letters[ pos ];
        for ( const auto& e : product.lts.out( s, a ) )
            for ( const auto& movers : step_movers( product, s, a, e.target ) )
            {
                bool moved = std::find( movers.begin(), movers.end(), i ) != movers.end();
                states.push_back( e.target );
                emitted.push_back( moved ? std::optional<std::string>( word[ pos ] ) : std::nullopt );
                extend();
                states.pop_back();
                emitted.pop_back();
            }
    };
    extend();
    return results;
}

} // namespace distdiag
