#pragma once

// Labeled transition systems with an observable / unobservable / fault
// partition of their actions, plus the observation operator on finite traces
// and on lassos (ultimately periodic infinite traces).

#include "errors.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stop_token>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace distdiag
{

using StateId = std::uint32_t;
using ActionIndex = std::uint32_t;

inline constexpr StateId no_state = std::numeric_limits<StateId>::max();

/// Faults are a subset of the unobservable actions, so `Fault` implies
/// "unobservable".
enum class ActionKind : std::uint8_t
{
    Observable,
    Unobservable,
    Fault,
};

[[nodiscard]] inline bool is_observable( ActionKind kind ) noexcept { return kind == ActionKind::Observable; }

[[nodiscard]] inline const char* to_string( ActionKind kind ) noexcept
{
    switch ( kind )
    {
    case ActionKind::Observable:
        return "observable";
    case ActionKind::Unobservable:
        return "unobservable";
    case ActionKind::Fault:
        return "fault";
    }
    return "?";
}

/// Interned set of action labels, each classified by an ActionKind. Indices
/// are dense and assigned in insertion order.
class Alphabet
{
public:
    Alphabet() = default;

    /// Adds `label`, or returns its index when it is already present with the
    /// same kind. A second insertion with a different kind is an error.
    ActionIndex add( std::string_view label, ActionKind kind )
    {
        if ( label.empty() )
            throw InputDomainError( "action labels must be non-empty" );
        if ( auto found = find( label ) )
        {
            if ( _kinds[ *found ] != kind )
                throw InputDomainError( "action '" + std::string( label ) + "' declared both " +
                                        to_string( _kinds[ *found ] ) + " and " + to_string( kind ) );
            return *found;
        }
        auto index = static_cast<ActionIndex>( _labels.size() );
        _labels.emplace_back( label );
        _kinds.push_back( kind );
        _index.emplace( _labels.back(), index );
        return index;
    }

    [[nodiscard]] std::optional<ActionIndex> find( std::string_view label ) const
    {
        auto it = _index.find( std::string( label ) );
        if ( it == _index.end() )
            return std::nullopt;
        return it->second;
    }

    [[nodiscard]] bool contains( std::string_view label ) const { return find( label ).has_value(); }

    /// Index of `label`; throws InputDomainError when absent.
    [[nodiscard]] ActionIndex at( std::string_view label ) const
    {
        if ( auto found = find( label ) )
            return *found;
        throw InputDomainError( "unknown action '" + std::string( label ) + "'" );
    }

    [[nodiscard]] std::size_t size() const noexcept { return _labels.size(); }
    [[nodiscard]] const std::string& label( ActionIndex a ) const { return _labels.at( a ); }
    [[nodiscard]] ActionKind kind( ActionIndex a ) const { return _kinds.at( a ); }
    [[nodiscard]] bool observable( ActionIndex a ) const { return _kinds.at( a ) == ActionKind::Observable; }
    [[nodiscard]] bool fault( ActionIndex a ) const { return _kinds.at( a ) == ActionKind::Fault; }
    [[nodiscard]] const std::vector<std::string>& labels() const noexcept { return _labels; }

    [[nodiscard]] std::vector<std::string> labels_of( ActionKind kind ) const
    {
        std::vector<std::string> out;
        for ( std::size_t i = 0; i < _labels.size(); ++i )
            if ( _kinds[ i ] == kind )
                out.push_back( _labels[ i ] );
        std::sort( out.begin(), out.end() );
        return out;
    }

    [[nodiscard]] std::vector<std::string> fault_labels() const { return labels_of( ActionKind::Fault ); }

    /// Same labels with the same kinds, independent of index order.
    friend bool operator==( const Alphabet& lhs, const Alphabet& rhs )
    {
        if ( lhs.size() != rhs.size() )
            return false;
        for ( std::size_t i = 0; i < lhs.size(); ++i )
        {
            auto other = rhs.find( lhs._labels[ i ] );
            if ( !other || rhs._kinds[ *other ] != lhs._kinds[ i ] )
                return false;
        }
        return true;
    }

private:
    std::vector<std::string> _labels;
    std::vector<ActionKind> _kinds;
    std::unordered_map<std::string, ActionIndex> _index;
};

struct Transition
{
    StateId source;
    ActionIndex action;
    StateId target;

    friend auto operator<=>( const Transition&, const Transition& ) = default;
};

/// Outgoing edge as stored in the adjacency arrays.
struct Edge
{
    ActionIndex action;
    StateId target;

    friend auto operator<=>( const Edge&, const Edge& ) = default;
};

/// A finite LTS over dense 0-based states. The transition relation may be
/// nondeterministic; duplicate triples are collapsed on construction.
/// Immutable once built.
class Lts
{
public:
    Lts() : Lts( Alphabet{}, 1, 0, {} ) {}

    Lts( Alphabet alphabet, std::size_t num_states, StateId initial, std::vector<Transition> transitions,
         std::string name = {} )
            : _alphabet{ std::move( alphabet ) }, _num_states{ num_states }, _initial{ initial },
              _name{ std::move( name ) }
    {
        if ( num_states == 0 )
            throw InputDomainError( "an LTS needs at least one state" );
        if ( num_states > std::numeric_limits<StateId>::max() - 1 )
            throw InputDomainError( "too many states" );
        if ( initial >= num_states )
            throw InputDomainError( "initial state " + std::to_string( initial ) + " out of range" );
        for ( const auto& t : transitions )
        {
            if ( t.source >= num_states || t.target >= num_states )
                throw InputDomainError( "transition endpoint out of range" );
            if ( t.action >= _alphabet.size() )
                throw InputDomainError( "transition action out of range" );
        }
        std::sort( transitions.begin(), transitions.end() );
        transitions.erase( std::unique( transitions.begin(), transitions.end() ), transitions.end() );

        _offsets.assign( num_states + 1, 0 );
        for ( const auto& t : transitions )
            ++_offsets[ t.source + 1 ];
        for ( std::size_t q = 0; q < num_states; ++q )
            _offsets[ q + 1 ] += _offsets[ q ];
        _edges.reserve( transitions.size() );
        for ( const auto& t : transitions )
            _edges.push_back( { t.action, t.target } );
    }

    [[nodiscard]] const Alphabet& alphabet() const noexcept { return _alphabet; }
    [[nodiscard]] std::size_t num_states() const noexcept { return _num_states; }
    [[nodiscard]] std::size_t num_transitions() const noexcept { return _edges.size(); }
    [[nodiscard]] StateId initial() const noexcept { return _initial; }
    [[nodiscard]] const std::string& name() const noexcept { return _name; }

    [[nodiscard]] Lts renamed( std::string name ) const
    {
        Lts copy = *this;
        copy._name = std::move( name );
        return copy;
    }

    /// Outgoing edges of `q`, sorted by (action, target).
    [[nodiscard]] std::span<const Edge> out( StateId q ) const
    {
        return { _edges.data() + _offsets[ q ], _edges.data() + _offsets[ q + 1 ] };
    }

    /// Outgoing edges of `q` labeled `a`.
    [[nodiscard]] std::span<const Edge> out( StateId q, ActionIndex a ) const
    {
        auto all = out( q );
        auto lo = std::lower_bound( all.begin(), all.end(), Edge{ a, 0 } );
        auto hi = std::lower_bound( lo, all.end(), Edge{ a + 1, 0 } );
        return { lo, hi };
    }

    [[nodiscard]] bool has_transition( StateId q, ActionIndex a, StateId target ) const
    {
        auto edges = out( q, a );
        return std::binary_search( edges.begin(), edges.end(), Edge{ a, target } );
    }

    [[nodiscard]] std::vector<Transition> transitions() const
    {
        std::vector<Transition> out_list;
        out_list.reserve( _edges.size() );
        for ( StateId q = 0; q < _num_states; ++q )
            for ( const auto& e : out( q ) )
                out_list.push_back( { q, e.action, e.target } );
        return out_list;
    }

private:
    Alphabet _alphabet;
    std::size_t _num_states;
    StateId _initial;
    std::string _name;
    std::vector<std::size_t> _offsets;
    std::vector<Edge> _edges;
};

/// Finite sequence of action labels; may be empty.
using Trace = std::vector<std::string>;

/// The infinite trace prefix · cycle^ω. `cycle` must be non-empty.
struct Lasso
{
    Trace prefix;
    Trace cycle;

    friend auto operator<=>( const Lasso&, const Lasso& ) = default;
};

/// Observation of a lasso: a lasso again, or a finite trace when the cycle
/// has no observable action.
using Observation = std::variant<Lasso, Trace>;

/// Keeps the observable actions of `trace`, in order.
[[nodiscard]] inline Trace observe( const Trace& trace, const Alphabet& alphabet )
{
    Trace out;
    for ( const auto& label : trace )
        if ( alphabet.observable( alphabet.at( label ) ) )
            out.push_back( label );
    return out;
}

[[nodiscard]] inline Observation observe_lasso( const Lasso& lasso, const Alphabet& alphabet )
{
    if ( lasso.cycle.empty() )
        throw InputDomainError( "lasso cycle must be non-empty" );
    Trace prefix = observe( lasso.prefix, alphabet );
    Trace cycle = observe( lasso.cycle, alphabet );
    if ( cycle.empty() )
        return prefix;
    return Lasso{ std::move( prefix ), std::move( cycle ) };
}

/// Canonical representative of the ω-word prefix · cycle^ω: primitive cycle,
/// shortest prefix. Two lassos denote the same infinite word iff their
/// normal forms are equal.
[[nodiscard]] inline Lasso normalize( Lasso lasso )
{
    if ( lasso.cycle.empty() )
        throw InputDomainError( "lasso cycle must be non-empty" );
    const auto n = lasso.cycle.size();
    for ( std::size_t d = 1; d <= n; ++d )
    {
        if ( n % d != 0 )
            continue;
        bool periodic = true;
        for ( std::size_t i = d; i < n && periodic; ++i )
            periodic = lasso.cycle[ i ] == lasso.cycle[ i - d ];
        if ( periodic )
        {
            lasso.cycle.resize( d );
            break;
        }
    }
    while ( !lasso.prefix.empty() && lasso.prefix.back() == lasso.cycle.back() )
    {
        lasso.prefix.pop_back();
        std::rotate( lasso.cycle.rbegin(), lasso.cycle.rbegin() + 1, lasso.cycle.rend() );
    }
    return lasso;
}

[[nodiscard]] inline bool same_omega_word( const Lasso& lhs, const Lasso& rhs )
{
    return normalize( lhs ) == normalize( rhs );
}

/// Normalizes the lasso alternative of an observation.
[[nodiscard]] inline Observation normalize( Observation observation )
{
    if ( auto* lasso = std::get_if<Lasso>( &observation ) )
        return normalize( std::move( *lasso ) );
    return observation;
}

/// Cooperative limits for explorations that can grow large.
struct ExploreLimits
{
    std::stop_token stop{};
    std::size_t max_states = 0; ///< 0 means unlimited

    /// Throws Cancelled / BudgetExceeded; called once per discovered state.
    void poll( std::size_t discovered ) const
    {
        if ( max_states != 0 && discovered > max_states )
            throw BudgetExceeded( max_states );
        if ( ( discovered & 0x3ff ) == 0 && stop.stop_requested() )
            throw Cancelled();
    }
};

struct ValidationReport
{
    bool passed = true;
    /// Offending states: dead states for liveness, one cycle for
    /// unobservable-cycle detection.
    std::vector<StateId> states;
    std::string message;

    explicit operator bool() const noexcept { return passed; }
};

[[nodiscard]] inline std::vector<bool> reachable_states( const Lts& lts )
{
    std::vector<bool> seen( lts.num_states(), false );
    std::vector<StateId> stack{ lts.initial() };
    seen[ lts.initial() ] = true;
    while ( !stack.empty() )
    {
        StateId q = stack.back();
        stack.pop_back();
        for ( const auto& e : lts.out( q ) )
            if ( !seen[ e.target ] )
            {
                seen[ e.target ] = true;
                stack.push_back( e.target );
            }
    }
    return seen;
}

/// Every reachable state must have an outgoing transition.
[[nodiscard]] inline ValidationReport validate_live( const Lts& lts )
{
    ValidationReport report;
    auto seen = reachable_states( lts );
    for ( StateId q = 0; q < lts.num_states(); ++q )
        if ( seen[ q ] && lts.out( q ).empty() )
            report.states.push_back( q );
    if ( !report.states.empty() )
    {
        report.passed = false;
        report.message = "dead states:";
        for ( auto q : report.states )
            report.message += " " + std::to_string( q );
    }
    return report;
}

/// The reachable unobservable subgraph must be acyclic. On failure `states`
/// holds one cycle q0 q1 ... qk (with an unobservable edge qk -> q0).
[[nodiscard]] inline ValidationReport validate_no_unobservable_cycles( const Lts& lts )
{
    ValidationReport report;
    const auto& sigma = lts.alphabet();
    auto seen = reachable_states( lts );
    enum : std::uint8_t { white, grey, black };
    std::vector<std::uint8_t> colour( lts.num_states(), white );
    struct Frame
    {
        StateId state;
        std::size_t next_edge;
    };
    for ( StateId root = 0; root < lts.num_states(); ++root )
    {
        if ( !seen[ root ] || colour[ root ] != white )
            continue;
        std::vector<Frame> stack{ { root, 0 } };
        colour[ root ] = grey;
        while ( !stack.empty() )
        {
            auto& top = stack.back();
            auto edges = lts.out( top.state );
            if ( top.next_edge == edges.size() )
            {
                colour[ top.state ] = black;
                stack.pop_back();
                continue;
            }
            const auto& e = edges[ top.next_edge++ ];
            if ( sigma.observable( e.action ) )
                continue;
            if ( colour[ e.target ] == grey )
            {
                auto from = std::find_if( stack.begin(), stack.end(),
                                          [&]( const Frame& f ) { return f.state == e.target; } );
                for ( auto it = from; it != stack.end(); ++it )
                    report.states.push_back( it->state );
                report.passed = false;
                report.message = "unobservable cycle through states:";
                for ( auto q : report.states )
                    report.message += " " + std::to_string( q );
                return report;
            }
            if ( colour[ e.target ] == white )
            {
                colour[ e.target ] = grey;
                stack.push_back( { e.target, 0 } );
            }
        }
    }
    return report;
}


/// Whether the finite `trace` labels some path from the initial state.
[[nodiscard]] inline bool accepts( const Lts& lts, const Trace& trace )
{
    std::vector<bool> current( lts.num_states(), false );
    current[ lts.initial() ] = true;
    for ( const auto& label : trace )
    {
        auto a = lts.alphabet().find( label );
        if ( !a )
            return false;
        std::vector<bool> next( lts.num_states(), false );
        bool any = false;
        for ( StateId q = 0; q < lts.num_states(); ++q )
            if ( current[ q ] )
                for ( const auto& e : lts.out( q, *a ) )
                    any = next[ e.target ] = true;
        if ( !any )
            return false;
        current = std::move( next );
    }
    return true;
}

/// Whether prefix · cycle^ω labels some infinite path from the initial state.
[[nodiscard]] inline bool accepts( const Lts& lts, const Lasso& lasso )
{
    if ( lasso.cycle.empty() )
        throw InputDomainError( "lasso cycle must be non-empty" );
    auto step = [ & ]( std::vector<StateId> current, const Trace& word ) {
        for ( const auto& label : word )
        {
            std::vector<StateId> next;
            if ( auto a = lts.alphabet().find( label ) )
                for ( auto q : current )
                    for ( const auto& e : lts.out( q, *a ) )
                        next.push_back( e.target );
            std::sort( next.begin(), next.end() );
            next.erase( std::unique( next.begin(), next.end() ), next.end() );
            current = std::move( next );
        }
        return current;
    };

    // Graph p -> p' when reading one cycle from p can end in p', explored
    // from the states reached after the prefix.
    std::map<StateId, std::vector<StateId>> succ;
    std::vector<StateId> stack = step( { lts.initial() }, lasso.prefix );
    for ( auto q : stack )
        succ[ q ];
    while ( !stack.empty() )
    {
        auto q = stack.back();
        stack.pop_back();
        auto targets = step( { q }, lasso.cycle );
        for ( auto r : targets )
            if ( succ.emplace( r, std::vector<StateId>{} ).second )
                stack.push_back( r );
        succ[ q ] = std::move( targets );
    }
    // Greatest set of discovered nodes that all keep a successor inside it.
    std::set<StateId> alive;
    for ( const auto& [ q, targets ] : succ )
        alive.insert( q );
    for ( bool changed = true; changed; )
    {
        changed = false;
        for ( auto it = alive.begin(); it != alive.end(); )
        {
            const auto& targets = succ[ *it ];
            if ( std::none_of( targets.begin(), targets.end(), [ & ]( StateId r ) { return alive.count( r ) > 0; } ) )
            {
                it = alive.erase( it );
                changed = true;
            }
            else
                ++it;
        }
    }
    return !alive.empty();
}

namespace detail
{

struct Restriction
{
    Lts lts;
    std::vector<StateId> original; ///< new state -> state of the input
};

/// Sub-LTS reachable from the initial state through edges accepted by
/// `keep`. Retained states keep their relative order.
template <typename EdgeFilter>
[[nodiscard]] Restriction restrict_reachable( const Lts& lts, EdgeFilter keep )
{
    std::vector<bool> seen( lts.num_states(), false );
    std::vector<StateId> stack{ lts.initial() };
    seen[ lts.initial() ] = true;
    while ( !stack.empty() )
    {
        StateId q = stack.back();
        stack.pop_back();
        for ( const auto& e : lts.out( q ) )
            if ( keep( q, e ) && !seen[ e.target ] )
            {
                seen[ e.target ] = true;
                stack.push_back( e.target );
            }
    }
    std::vector<StateId> renumber( lts.num_states(), no_state );
    std::vector<StateId> original;
    for ( StateId q = 0; q < lts.num_states(); ++q )
        if ( seen[ q ] )
        {
            renumber[ q ] = static_cast<StateId>( original.size() );
            original.push_back( q );
        }
    std::vector<Transition> kept;
    for ( StateId q : original )
        for ( const auto& e : lts.out( q ) )
            if ( keep( q, e ) )
                kept.push_back( { renumber[ q ], e.action, renumber[ e.target ] } );
    Lts result( lts.alphabet(), original.size(), renumber[ lts.initial() ], std::move( kept ), lts.name() );
    return { std::move( result ), std::move( original ) };
}

} // namespace detail

/// Restriction to the states reachable from the initial state. Idempotent.
[[nodiscard]] inline Lts reachable( const Lts& lts )
{
    return detail::restrict_reachable( lts, []( StateId, const Edge& ) { return true; } ).lts;
}

/// Builds an LTS from label triples; kinds come from `alphabet`.
[[nodiscard]] inline Lts make_lts( const Alphabet& alphabet, std::size_t num_states, StateId initial,
                                   const std::vector<std::tuple<StateId, std::string, StateId>>& triples,
                                   std::string name = {} )
{
    std::vector<Transition> transitions;
    transitions.reserve( triples.size() );
    for ( const auto& [ from, label, to ] : triples )
        transitions.push_back( { from, alphabet.at( label ), to } );
    return Lts( alphabet, num_states, initial, std::move( transitions ), std::move( name ) );
}

} // namespace distdiag
