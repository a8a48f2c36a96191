#pragma once

// JSON documents and text tables for verdicts and reports.

#include "diagnose.hpp"
#include "errors.hpp"
#include "orchestrate.hpp"

#include <json.hpp>

#include <cstdio>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>

namespace distdiag
{

using Json = nlohmann::json;

inline constexpr std::string_view analysis_schema = "distdiag.analysis/1";
inline constexpr std::string_view bench_schema = "distdiag.bench/1";

namespace detail
{

template <typename Enum, std::size_t N>
[[nodiscard]] Enum parse_enum( const std::string& text, const Enum ( &values )[ N ], const char* what )
{
    for ( auto v : values )
        if ( text == to_string( v ) )
            return v;
    throw InputDomainError( std::string( "unknown " ) + what + " '" + text + "'" );
}

} // namespace detail

[[nodiscard]] inline Status status_from_string( const std::string& s )
{
    static constexpr Status all[] = { Status::Diagnosable, Status::NonDiagnosable, Status::Inconclusive };
    return detail::parse_enum( s, all, "status" );
}

inline void to_json( Json& j, const Lasso& l ) { j = Json{ { "prefix", l.prefix }, { "cycle", l.cycle } }; }

inline void from_json( const Json& j, Lasso& l )
{
    j.at( "prefix" ).get_to( l.prefix );
    j.at( "cycle" ).get_to( l.cycle );
}

inline void to_json( Json& j, const Witness& w ) { j = Json{ { "faulty", w.faulty }, { "correct", w.correct } }; }

inline void from_json( const Json& j, Witness& w )
{
    j.at( "faulty" ).get_to( w.faulty );
    j.at( "correct" ).get_to( w.correct );
}

inline void to_json( Json& j, const Verdict& v )
{
    j = Json{ { "status", to_string( v.status ) },
              { "fault", v.fault },
              { "witness", v.witness ? Json( *v.witness ) : Json( nullptr ) },
              { "stats",
                { { "subject_states", v.stats.subject_states },
                  { "subject_transitions", v.stats.subject_transitions },
                  { "twin_states", v.stats.twin_states },
                  { "seconds", v.stats.seconds } } },
              { "cancelled", v.cancelled },
              { "capped", v.capped },
              { "warnings", v.warnings } };
}

inline void from_json( const Json& j, Verdict& v )
{
    v.status = status_from_string( j.at( "status" ).get<std::string>() );
    j.at( "fault" ).get_to( v.fault );
    if ( j.at( "witness" ).is_null() )
        v.witness.reset();
    else
        v.witness = j.at( "witness" ).get<Witness>();
    const auto& s = j.at( "stats" );
    s.at( "subject_states" ).get_to( v.stats.subject_states );
    s.at( "subject_transitions" ).get_to( v.stats.subject_transitions );
    s.at( "twin_states" ).get_to( v.stats.twin_states );
    s.at( "seconds" ).get_to( v.stats.seconds );
    j.at( "cancelled" ).get_to( v.cancelled );
    j.at( "capped" ).get_to( v.capped );
    j.at( "warnings" ).get_to( v.warnings );
}

inline void to_json( Json& j, const TaskReport& t )
{
    j = Json{ { "kind", to_string( t.kind ) }, { "component", t.component }, { "fault", t.fault },
              { "subject", t.subject },        { "estimate", t.estimate },   { "verdict", t.verdict } };
}

inline void from_json( const Json& j, TaskReport& t )
{
    static constexpr TaskKind kinds[] = { TaskKind::Product, TaskKind::SelfCheck };
    t.kind = detail::parse_enum( j.at( "kind" ).get<std::string>(), kinds, "task kind" );
    j.at( "component" ).get_to( t.component );
    j.at( "fault" ).get_to( t.fault );
    j.at( "subject" ).get_to( t.subject );
    j.at( "estimate" ).get_to( t.estimate );
    j.at( "verdict" ).get_to( t.verdict );
}

inline void to_json( Json& j, const AnalysisReport& r )
{
    j = Json{ { "schema", analysis_schema },
              { "method", to_string( r.method ) },
              { "overall", to_string( r.overall ) },
              { "system", r.system },
              { "tasks", r.tasks },
              { "deciding_task", r.deciding_task ? Json( *r.deciding_task ) : Json( nullptr ) },
              { "elapsed", r.elapsed },
              { "cancellation_count", r.cancellation_count },
              { "time_model", to_string( r.time_model ) },
              { "effective_time", r.effective_time },
              { "alerts", r.alerts },
              { "fallback", r.fallback ? Json( *r.fallback ) : Json( nullptr ) } };
}

inline void from_json( const Json& j, AnalysisReport& r )
{
    if ( j.at( "schema" ).get<std::string>() != analysis_schema )
        throw InputDomainError( "not an analysis report document" );
    static constexpr Method methods[] = { Method::Distributed, Method::Classic };
    static constexpr TimeModel models[] = { TimeModel::Min, TimeModel::Max, TimeModel::Sum };
    r.method = detail::parse_enum( j.at( "method" ).get<std::string>(), methods, "method" );
    r.overall = status_from_string( j.at( "overall" ).get<std::string>() );
    j.at( "system" ).get_to( r.system );
    j.at( "tasks" ).get_to( r.tasks );
    if ( j.at( "deciding_task" ).is_null() )
        r.deciding_task.reset();
    else
        r.deciding_task = j.at( "deciding_task" ).get<std::size_t>();
    j.at( "elapsed" ).get_to( r.elapsed );
    j.at( "cancellation_count" ).get_to( r.cancellation_count );
    r.time_model = detail::parse_enum( j.at( "time_model" ).get<std::string>(), models, "time model" );
    j.at( "effective_time" ).get_to( r.effective_time );
    j.at( "alerts" ).get_to( r.alerts );
    if ( j.at( "fallback" ).is_null() )
        r.fallback.reset();
    else
        r.fallback = std::make_shared<const AnalysisReport>( j.at( "fallback" ).get<AnalysisReport>() );
}

inline void to_json( Json& j, const BenchRow& row )
{
    j = Json{ { "distributed_seconds", row.distributed_seconds },
              { "classic_seconds", row.classic_seconds },
              { "distributed", to_string( row.distributed ) },
              { "classic", to_string( row.classic ) } };
}

inline void from_json( const Json& j, BenchRow& row )
{
    j.at( "distributed_seconds" ).get_to( row.distributed_seconds );
    j.at( "classic_seconds" ).get_to( row.classic_seconds );
    row.distributed = status_from_string( j.at( "distributed" ).get<std::string>() );
    row.classic = status_from_string( j.at( "classic" ).get<std::string>() );
}

inline void to_json( Json& j, const BenchReport& b )
{
    j = Json{ { "schema", bench_schema },
              { "system", b.system },
              { "verdict", to_string( b.verdict ) },
              { "agreement", b.agreement },
              { "distributed_mean", b.distributed_mean },
              { "classic_mean", b.classic_mean },
              { "speedup", b.speedup },
              { "rows", b.rows } };
}

inline void from_json( const Json& j, BenchReport& b )
{
    if ( j.at( "schema" ).get<std::string>() != bench_schema )
        throw InputDomainError( "not a bench report document" );
    j.at( "system" ).get_to( b.system );
    b.verdict = status_from_string( j.at( "verdict" ).get<std::string>() );
    j.at( "agreement" ).get_to( b.agreement );
    j.at( "distributed_mean" ).get_to( b.distributed_mean );
    j.at( "classic_mean" ).get_to( b.classic_mean );
    j.at( "speedup" ).get_to( b.speedup );
    j.at( "rows" ).get_to( b.rows );
}

/// Copy of a report document with every wall-clock field removed.
[[nodiscard]] inline Json without_timing( Json j )
{
    static constexpr std::string_view timing[] = { "seconds",         "elapsed",          "effective_time",
                                                   "classic_seconds", "distributed_seconds", "distributed_mean",
                                                   "classic_mean",    "speedup" };
    if ( j.is_object() )
    {
        for ( auto key : timing )
            j.erase( std::string( key ) );
        for ( auto& [ key, value ] : j.items() )
            value = without_timing( value );
    }
    else if ( j.is_array() )
        for ( auto& value : j )
            value = without_timing( value );
    return j;
}

[[nodiscard]] inline bool same_modulo_timing( const AnalysisReport& a, const AnalysisReport& b )
{
    return without_timing( Json( a ) ) == without_timing( Json( b ) );
}

namespace detail
{

[[nodiscard]] inline std::string seconds_text( double s )
{
    char buffer[ 32 ];
    std::snprintf( buffer, sizeof buffer, "%.10f", s );
    return buffer;
}

[[nodiscard]] inline std::string lasso_text( const Lasso& l )
{
    std::string out;
    for ( const auto& a : l.prefix )
        out += ( out.empty() ? "" : "." ) + a;
    std::string cycle;
    for ( const auto& a : l.cycle )
        cycle += ( cycle.empty() ? "" : "." ) + a;
    return out + ( out.empty() ? "" : "." ) + "(" + cycle + ")^w";
}

[[nodiscard]] inline std::string pad( std::string s, std::size_t width )
{
    if ( s.size() < width )
        s.append( width - s.size(), ' ' );
    return s;
}

} // namespace detail

[[nodiscard]] inline std::string witness_text( const Witness& w )
{
    return "faulty:  " + detail::lasso_text( w.faulty ) + "\ncorrect: " + detail::lasso_text( w.correct ) + "\n";
}

/// Per-task table followed by the overall verdict.
[[nodiscard]] inline std::string format_report( const AnalysisReport& r )
{
    std::size_t width = 9;
    for ( const auto& t : r.tasks )
        width = std::max( width, t.subject.size() + 2 );
    std::ostringstream out;
    out << "system: " << r.system << "\nmethod: " << to_string( r.method ) << "\n\n";
    out << detail::pad( "subject", width ) << detail::pad( "kind", 12 ) << detail::pad( "fault", 8 )
        << detail::pad( "verdict", 17 ) << "seconds\n";
    for ( const auto& t : r.tasks )
    {
        std::string verdict = t.verdict.cancelled ? "cancelled" : t.verdict.capped ? "capped" : to_string( t.verdict.status );
        out << detail::pad( t.subject, width ) << detail::pad( to_string( t.kind ), 12 ) << detail::pad( t.fault, 8 )
            << detail::pad( verdict, 17 ) << detail::seconds_text( t.verdict.stats.seconds ) << "\n";
    }
    out << "\noverall: " << to_string( r.overall ) << "\n";
    if ( const auto* v = r.deciding_verdict() )
    {
        const auto& t = r.tasks[ *r.deciding_task ];
        out << "decided by: " << t.subject << " [" << t.fault << "]\n";
        if ( v->witness )
            out << witness_text( *v->witness );
    }
    out << "cancelled tasks: " << r.cancellation_count << "\n";
    out << "elapsed: " << detail::seconds_text( r.elapsed ) << " s\n";
    out << "effective time (" << to_string( r.time_model ) << "): " << detail::seconds_text( r.effective_time ) << " s\n";
    for ( const auto& a : r.alerts )
        out << "alert: " << a << "\n";
    if ( r.fallback )
        out << "\n-- fallback --\n" << format_report( *r.fallback );
    return out.str();
}

/// System | Diagnosable | Our method | Classic method, one row per repetition.
[[nodiscard]] inline std::string format_bench( const BenchReport& b )
{
    const std::string verdict = b.verdict == Status::Diagnosable      ? "yes"
                                : b.verdict == Status::NonDiagnosable ? "no"
                                                                      : "?";
    const auto width = std::max<std::size_t>( 8, b.system.size() + 2 );
    std::ostringstream out;
    out << detail::pad( "System", width ) << "| Diagnosable | Our method     | Classic method\n";
    out << std::string( width, '-' ) << "+-------------+----------------+---------------\n";
    const auto middle = b.rows.size() / 2;
    for ( std::size_t k = 0; k < b.rows.size(); ++k )
    {
        out << detail::pad( k == middle ? b.system : "", width ) << "| " << detail::pad( k == middle ? verdict : "", 12 )
            << "| " << detail::pad( detail::seconds_text( b.rows[ k ].distributed_seconds ), 15 ) << "| "
            << detail::seconds_text( b.rows[ k ].classic_seconds ) << "\n";
    }
    out << "\nmean: " << detail::seconds_text( b.distributed_mean ) << " s (ours), "
        << detail::seconds_text( b.classic_mean ) << " s (classic); speedup "
        << std::fixed << std::setprecision( 2 ) << b.speedup << "x; agreement " << ( b.agreement ? "yes" : "no" ) << "\n";
    return out.str();
}

} // namespace distdiag
