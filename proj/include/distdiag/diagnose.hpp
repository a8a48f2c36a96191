#pragma once

// Per-fault diagnosability of a single LTS via the twin plant: the
// fault-annotated system is composed with itself, synchronizing on
// observable actions only, and the fault is non-diagnosable iff a reachable
// cycle with an observable step keeps one side faulty and the other side
// fault-free.

#include "errors.hpp"
#include "lts.hpp"

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace distdiag
{

/// Whether a fault occurred earlier on the run (monotone: N -> F only).
enum class FaultTag : std::uint8_t
{
    N = 0,
    F = 1,
};

struct AnnotatedLts
{
    Lts lts;                   ///< same alphabet as the input
    std::vector<StateId> base; ///< annotated state -> input state
    std::vector<FaultTag> tag;
};

namespace detail
{

[[nodiscard]] inline ActionIndex declared_fault( const Lts& lts, std::string_view fault )
{
    auto f = lts.alphabet().find( fault );
    if ( !f || !lts.alphabet().fault( *f ) )
        throw InputDomainError( "'" + std::string( fault ) + "' is not a declared fault" );
    return *f;
}

} // namespace detail

/// States become (q, tag); a `fault` transition sets the tag to F. Only the
/// reachable part is built, in breadth-first order from (q0, N).
[[nodiscard]] inline AnnotatedLts annotate_faults( const Lts& lts, std::string_view fault )
{
    const auto f = detail::declared_fault( lts, fault );
    const auto n = lts.num_states();
    std::vector<StateId> id( 2 * n, no_state );
    AnnotatedLts out;
    auto intern = [ & ]( StateId q, FaultTag t ) {
        auto& slot = id[ 2 * q + static_cast<std::size_t>( t ) ];
        if ( slot == no_state )
        {
            slot = static_cast<StateId>( out.base.size() );
            out.base.push_back( q );
            out.tag.push_back( t );
        }
        return slot;
    };
    intern( lts.initial(), FaultTag::N );
    std::vector<Transition> transitions;
    for ( StateId s = 0; s < out.base.size(); ++s )
    {
        const auto q = out.base[ s ];
        const auto t = out.tag[ s ];
        for ( const auto& e : lts.out( q ) )
            transitions.push_back( { s, e.action, intern( e.target, e.action == f ? FaultTag::F : t ) } );
    }
    out.lts = Lts( lts.alphabet(), out.base.size(), 0, std::move( transitions ), lts.name() );
    return out;
}

enum class TwinMove : std::uint8_t
{
    Joint, ///< both sides on the same observable action
    Left,  ///< left side alone on an unobservable action
    Right, ///< right side alone on an unobservable action
};

[[nodiscard]] constexpr TwinMove mirror( TwinMove m ) noexcept
{
    return m == TwinMove::Left ? TwinMove::Right : m == TwinMove::Right ? TwinMove::Left : m;
}

struct TwinEdge
{
    StateId target;
    ActionIndex action;
    TwinMove move;
    bool swapped; ///< symmetric mode: the stored target is the mirror of the real successor
};

/// Reachable twin plant. States are pairs of annotated states. With symmetry
/// reduction on, only pairs with left <= right are stored and an edge whose
/// real successor is out of order points to its mirror with `swapped` set.
struct TwinPlant
{
    AnnotatedLts annotated;
    bool symmetric = true;
    std::vector<std::pair<StateId, StateId>> states;
    std::vector<std::size_t> offsets;
    std::vector<TwinEdge> edges;
    std::vector<std::size_t> parent_edge; ///< BFS tree edge reaching each state (npos for the root)

    static constexpr std::size_t npos = static_cast<std::size_t>( -1 );

    [[nodiscard]] std::size_t num_states() const noexcept { return states.size(); }

    [[nodiscard]] std::span<const TwinEdge> out( StateId s ) const
    {
        return { edges.data() + offsets[ s ], edges.data() + offsets[ s + 1 ] };
    }

    [[nodiscard]] FaultTag left_tag( StateId s ) const { return annotated.tag[ states[ s ].first ]; }
    [[nodiscard]] FaultTag right_tag( StateId s ) const { return annotated.tag[ states[ s ].second ]; }

    /// One side faulty, the other not.
    [[nodiscard]] bool ambiguous( StateId s ) const { return left_tag( s ) != right_tag( s ); }
};

struct TwinOptions
{
    bool symmetry = true;
    ExploreLimits limits{};
};

[[nodiscard]] inline TwinPlant build_twin_plant( const Lts& lts, std::string_view fault, const TwinOptions& options = {} )
{
    auto cycles = validate_no_unobservable_cycles( lts );
    if ( !cycles )
        throw InputDomainError( "twin plant needs a system without unobservable cycles (" + cycles.message + ")" );

    TwinPlant tp;
    tp.annotated = annotate_faults( lts, fault );
    tp.symmetric = options.symmetry;
    const auto& g = tp.annotated.lts;
    const auto& sigma = g.alphabet();

    std::unordered_map<std::uint64_t, StateId> index;
    auto intern = [ & ]( StateId l, StateId r, bool& swapped ) {
        swapped = tp.symmetric && l > r;
        if ( swapped )
            std::swap( l, r );
        auto key = ( static_cast<std::uint64_t>( l ) << 32 ) | r;
        auto [ it, inserted ] = index.try_emplace( key, static_cast<StateId>( tp.states.size() ) );
        if ( inserted )
        {
            options.limits.poll( tp.states.size() + 1 );
            tp.states.emplace_back( l, r );
            tp.parent_edge.push_back( TwinPlant::npos );
        }
        return it->second;
    };
    bool swapped = false;
    intern( g.initial(), g.initial(), swapped );

    auto add_edge = [ & ]( StateId l, StateId r, ActionIndex a, TwinMove m ) {
        bool sw = false;
        auto before = tp.states.size();
        auto target = intern( l, r, sw );
        if ( tp.states.size() != before )
            tp.parent_edge[ target ] = tp.edges.size();
        tp.edges.push_back( { target, a, m, sw } );
    };

    for ( StateId s = 0; s < tp.states.size(); ++s )
    {
        tp.offsets.push_back( tp.edges.size() );
        const auto [ l, r ] = tp.states[ s ];
        for ( const auto& e : g.out( l ) )
        {
            if ( sigma.observable( e.action ) )
            {
                for ( const auto& e2 : g.out( r, e.action ) )
                    add_edge( e.target, e2.target, e.action, TwinMove::Joint );
            }
            else
                add_edge( e.target, r, e.action, TwinMove::Left );
        }
        for ( const auto& e : g.out( r ) )
            if ( !sigma.observable( e.action ) )
                add_edge( l, e.target, e.action, TwinMove::Right );
    }
    tp.offsets.push_back( tp.edges.size() );
    return tp;
}

/// One concrete twin-plant step: the move taken and the pair reached.
struct TwinStep
{
    TwinMove move;
    ActionIndex action;
    StateId left;
    StateId right;
};

/// Access path from the initial pair plus a cycle back to the pair the
/// access path ends in. Every pair on the cycle is ambiguous and the cycle
/// has at least one joint step.
struct AmbiguousCycle
{
    std::vector<TwinStep> access;
    std::vector<TwinStep> cycle;
};

namespace detail
{

/// Strongly connected components of the subgraph induced by ambiguous
/// states; non-ambiguous states get `no_state`.
[[nodiscard]] inline std::vector<StateId> ambiguous_components( const TwinPlant& tp )
{
    const auto n = static_cast<StateId>( tp.num_states() );
    std::vector<StateId> comp( n, no_state );
    std::vector<StateId> low( n, 0 ), order( n, no_state );
    std::vector<bool> on_stack( n, false );
    std::vector<StateId> scc_stack;
    struct Frame
    {
        StateId state;
        std::size_t next;
    };
    StateId counter = 0, comps = 0;
    for ( StateId root = 0; root < n; ++root )
    {
        if ( !tp.ambiguous( root ) || order[ root ] != no_state )
            continue;
        std::vector<Frame> call{ { root, 0 } };
        order[ root ] = low[ root ] = counter++;
        scc_stack.push_back( root );
        on_stack[ root ] = true;
        while ( !call.empty() )
        {
            auto& top = call.back();
            auto edges = tp.out( top.state );
            if ( top.next < edges.size() )
            {
                auto w = edges[ top.next++ ].target;
                if ( !tp.ambiguous( w ) )
                    continue;
                if ( order[ w ] == no_state )
                {
                    order[ w ] = low[ w ] = counter++;
                    scc_stack.push_back( w );
                    on_stack[ w ] = true;
                    call.push_back( { w, 0 } );
                }
                else if ( on_stack[ w ] )
                    low[ top.state ] = std::min( low[ top.state ], order[ w ] );
                continue;
            }
            auto v = top.state;
            call.pop_back();
            if ( !call.empty() )
                low[ call.back().state ] = std::min( low[ call.back().state ], low[ v ] );
            if ( low[ v ] == order[ v ] )
            {
                StateId w;
                do
                {
                    w = scc_stack.back();
                    scc_stack.pop_back();
                    on_stack[ w ] = false;
                    comp[ w ] = comps;
                } while ( w != v );
                ++comps;
            }
        }
    }
    return comp;
}

struct QuotientStep
{
    StateId from;
    std::size_t edge;
};

[[nodiscard]] inline std::vector<TwinStep> lift( const TwinPlant& tp, const std::vector<QuotientStep>& steps,
                                                 bool& orientation )
{
    std::vector<TwinStep> out;
    for ( const auto& step : steps )
    {
        const auto& e = tp.edges[ step.edge ];
        auto move = orientation ? mirror( e.move ) : e.move;
        orientation = orientation != e.swapped;
        auto [ l, r ] = tp.states[ e.target ];
        if ( orientation )
            std::swap( l, r );
        out.push_back( { move, e.action, l, r } );
    }
    return out;
}

[[nodiscard]] inline AmbiguousCycle extract_cycle( const TwinPlant& tp, const std::vector<StateId>& comp,
                                                   StateId scc )
{
    // First internal joint edge u -> v in state order.
    StateId u = no_state;
    std::size_t joint = TwinPlant::npos;
    for ( StateId s = 0; s < tp.num_states() && u == no_state; ++s )
    {
        if ( comp[ s ] != scc )
            continue;
        for ( std::size_t k = tp.offsets[ s ]; k < tp.offsets[ s + 1 ]; ++k )
            if ( tp.edges[ k ].move == TwinMove::Joint && comp[ tp.edges[ k ].target ] == scc )
            {
                u = s;
                joint = k;
                break;
            }
    }
    const StateId v = tp.edges[ joint ].target;

    // Shortest path v -> u inside the component.
    std::vector<std::size_t> via( tp.num_states(), TwinPlant::npos );
    std::vector<StateId> from( tp.num_states(), no_state );
    std::vector<StateId> queue{ v };
    from[ v ] = v;
    for ( std::size_t head = 0; head < queue.size() && from[ u ] == no_state; ++head )
    {
        auto s = queue[ head ];
        for ( std::size_t k = tp.offsets[ s ]; k < tp.offsets[ s + 1 ]; ++k )
        {
            auto t = tp.edges[ k ].target;
            if ( comp[ t ] == scc && from[ t ] == no_state )
            {
                from[ t ] = s;
                via[ t ] = k;
                queue.push_back( t );
            }
        }
    }
    std::vector<QuotientStep> cycle;
    for ( StateId s = u; s != v; s = from[ s ] )
        cycle.push_back( { from[ s ], via[ s ] } );
    cycle.push_back( { u, joint } );
    std::reverse( cycle.begin(), cycle.end() );

    std::vector<QuotientStep> access;
    for ( StateId s = u; tp.parent_edge[ s ] != TwinPlant::npos; )
    {
        auto k = tp.parent_edge[ s ];
        auto src = static_cast<StateId>( std::upper_bound( tp.offsets.begin(), tp.offsets.end(), k ) -
                                         tp.offsets.begin() - 1 );
        access.push_back( { src, k } );
        s = src;
    }
    std::reverse( access.begin(), access.end() );

    AmbiguousCycle result;
    bool orientation = false;
    result.access = lift( tp, access, orientation );
    const bool at_start = orientation;
    result.cycle = lift( tp, cycle, orientation );
    if ( orientation != at_start )
    {
        auto again = lift( tp, cycle, orientation );
        result.cycle.insert( result.cycle.end(), again.begin(), again.end() );
    }
    return result;
}

} // namespace detail

/// Ambiguous cycles, one per qualifying component, ordered by the lowest
/// state index of the component (discovery order). At most `limit` are
/// extracted (0 = all).
[[nodiscard]] inline std::vector<AmbiguousCycle> ambiguous_cycles( const TwinPlant& tp, std::size_t limit = 0 )
{
    auto comp = detail::ambiguous_components( tp );
    std::vector<bool> qualifies;
    for ( StateId s = 0; s < tp.num_states(); ++s )
    {
        if ( comp[ s ] == no_state )
            continue;
        if ( comp[ s ] >= qualifies.size() )
            qualifies.resize( comp[ s ] + 1, false );
        for ( const auto& e : tp.out( s ) )
            if ( e.move == TwinMove::Joint && comp[ e.target ] == comp[ s ] )
                qualifies[ comp[ s ] ] = true;
    }
    std::vector<AmbiguousCycle> out;
    std::vector<bool> done( qualifies.size(), false );
    for ( StateId s = 0; s < tp.num_states(); ++s )
    {
        if ( comp[ s ] == no_state || !qualifies[ comp[ s ] ] || done[ comp[ s ] ] )
            continue;
        done[ comp[ s ] ] = true;
        out.push_back( detail::extract_cycle( tp, comp, comp[ s ] ) );
        if ( limit != 0 && out.size() == limit )
            break;
    }
    return out;
}

[[nodiscard]] inline std::optional<AmbiguousCycle> find_ambiguous_cycle( const TwinPlant& tp )
{
    auto cycles = ambiguous_cycles( tp, 1 );
    if ( cycles.empty() )
        return std::nullopt;
    return std::move( cycles.front() );
}

/// Two infinite traces with the same observation, exactly one containing
/// the fault.
struct Witness
{
    Lasso faulty;
    Lasso correct;

    friend bool operator==( const Witness&, const Witness& ) = default;
};

/// Splits a twin-plant cycle into the lassos followed by each side.
[[nodiscard]] inline Witness witness_from( const TwinPlant& tp, const AmbiguousCycle& cycle )
{
    const auto& sigma = tp.annotated.lts.alphabet();
    Lasso left, right;
    auto collect = [ & ]( const std::vector<TwinStep>& steps, Trace& l, Trace& r ) {
        for ( const auto& step : steps )
        {
            const auto& label = sigma.label( step.action );
            if ( step.move != TwinMove::Right )
                l.push_back( label );
            if ( step.move != TwinMove::Left )
                r.push_back( label );
        }
    };
    collect( cycle.access, left.prefix, right.prefix );
    collect( cycle.cycle, left.cycle, right.cycle );
    const auto& anchor = cycle.cycle.back();
    if ( tp.annotated.tag[ anchor.left ] == FaultTag::F )
        return { std::move( left ), std::move( right ) };
    return { std::move( right ), std::move( left ) };
}

/// Checks a witness against its LTS: both lassos are traces, their
/// observations are the same infinite word and only `faulty` holds the fault.
[[nodiscard]] inline ValidationReport validate_witness( const Lts& lts, std::string_view fault, const Witness& w )
{
    ValidationReport report;
    auto fail = [ & ]( std::string message ) {
        report.passed = false;
        report.message = std::move( message );
        return report;
    };
    if ( w.faulty.cycle.empty() || w.correct.cycle.empty() )
        return fail( "witness lasso with an empty cycle" );
    if ( !accepts( lts, w.faulty ) )
        return fail( "faulty lasso is not a trace of the system" );
    if ( !accepts( lts, w.correct ) )
        return fail( "correct lasso is not a trace of the system" );
    auto contains = []( const Lasso& l, std::string_view f ) {
        auto in = [ & ]( const Trace& t ) { return std::find( t.begin(), t.end(), f ) != t.end(); };
        return in( l.prefix ) || in( l.cycle );
    };
    if ( !contains( w.faulty, fault ) )
        return fail( "faulty lasso does not contain the fault" );
    if ( contains( w.correct, fault ) )
        return fail( "correct lasso contains the fault" );
    auto of = observe_lasso( w.faulty, lts.alphabet() );
    auto oc = observe_lasso( w.correct, lts.alphabet() );
    if ( !std::holds_alternative<Lasso>( of ) || !std::holds_alternative<Lasso>( oc ) )
        return fail( "witness observation is finite" );
    if ( !same_omega_word( std::get<Lasso>( of ), std::get<Lasso>( oc ) ) )
        return fail( "witness observations differ" );
    return report;
}

enum class Status : std::uint8_t
{
    Diagnosable,
    NonDiagnosable,
    Inconclusive,
};

[[nodiscard]] inline const char* to_string( Status s ) noexcept
{
    switch ( s )
    {
    case Status::Diagnosable:
        return "diagnosable";
    case Status::NonDiagnosable:
        return "non_diagnosable";
    case Status::Inconclusive:
        return "inconclusive";
    }
    return "?";
}

struct VerdictStats
{
    std::size_t subject_states = 0;
    std::size_t subject_transitions = 0;
    std::size_t twin_states = 0;
    double seconds = 0.0;
};

struct Verdict
{
    Status status = Status::Inconclusive;
    std::string fault;
    std::optional<Witness> witness; ///< present iff NonDiagnosable
    VerdictStats stats;
    bool cancelled = false;
    bool capped = false;
    std::vector<std::string> warnings;
};

struct CheckOptions
{
    bool symmetry = true;
    ExploreLimits limits{};
};

[[nodiscard]] inline Verdict check_diagnosable( const Lts& lts, std::string_view fault, const CheckOptions& options = {} )
{
    const auto start = std::chrono::steady_clock::now();
    Verdict verdict;
    verdict.fault = std::string( fault );
    verdict.stats.subject_states = lts.num_states();
    verdict.stats.subject_transitions = lts.num_transitions();
    static_cast<void>( detail::declared_fault( lts, fault ) );
    if ( auto live = validate_live( lts ); !live )
        verdict.warnings.push_back( "system is not live; " + live.message );
    auto elapsed = [ & ] {
        return std::chrono::duration<double>( std::chrono::steady_clock::now() - start ).count();
    };
    try
    {
        auto tp = build_twin_plant( lts, fault, { options.symmetry, options.limits } );
        verdict.stats.twin_states = tp.num_states();
        if ( options.limits.stop.stop_requested() )
            throw Cancelled();
        if ( auto cycle = find_ambiguous_cycle( tp ) )
        {
            verdict.status = Status::NonDiagnosable;
            verdict.witness = witness_from( tp, *cycle );
            if ( auto check = validate_witness( lts, fault, *verdict.witness ); !check )
                throw std::logic_error( "internal error: invalid witness: " + check.message );
        }
        else
            verdict.status = Status::Diagnosable;
    }
    catch ( const Cancelled& )
    {
        verdict.status = Status::Inconclusive;
        verdict.cancelled = true;
    }
    catch ( const BudgetExceeded& )
    {
        verdict.status = Status::Inconclusive;
        verdict.capped = true;
    }
    verdict.stats.seconds = elapsed();
    return verdict;
}

using FaultVerdicts = std::map<std::string, Verdict>;

/// One verdict per fault label (all declared faults when `faults` is empty).
[[nodiscard]] inline FaultVerdicts check_all_faults( const Lts& lts, const CheckOptions& options = {},
                                                     const std::vector<std::string>& faults = {} )
{
    FaultVerdicts out;
    for ( const auto& f : faults.empty() ? lts.alphabet().fault_labels() : faults )
        out.emplace( f, check_diagnosable( lts, f, options ) );
    return out;
}

/// NonDiagnosable if any fault is, else Inconclusive if any is, else
/// Diagnosable (also for an empty map).
[[nodiscard]] inline Status overall_status( const FaultVerdicts& verdicts )
{
    bool inconclusive = false;
    for ( const auto& [ fault, v ] : verdicts )
    {
        if ( v.status == Status::NonDiagnosable )
            return Status::NonDiagnosable;
        inconclusive = inconclusive || v.status == Status::Inconclusive;
    }
    return inconclusive ? Status::Inconclusive : Status::Diagnosable;
}

} // namespace distdiag
