#pragma once

// Aldebaran `.aut` reader/writer, the JSON alphabet manifest that supplies
// the observability partition `.aut` cannot carry, and DOT export.

#include "errors.hpp"
#include "lts.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace distdiag
{

/// Observability partition for labels read from `.aut` files. Labels not
/// listed as unobservable are observable. `actions` optionally declares
/// labels that belong to the component alphabet even though no transition
/// uses them (needed to persist reduced components faithfully).
struct Manifest
{
    std::vector<std::string> unobservable;
    std::vector<std::string> faults;
    std::vector<std::string> actions;
    std::string name;

    [[nodiscard]] ActionKind classify( std::string_view label ) const
    {
        auto listed = []( const std::vector<std::string>& list, std::string_view l ) {
            return std::find( list.begin(), list.end(), l ) != list.end();
        };
        if ( listed( faults, label ) )
            return ActionKind::Fault;
        if ( listed( unobservable, label ) )
            return ActionKind::Unobservable;
        return ActionKind::Observable;
    }

    void validate() const
    {
        for ( const auto& f : faults )
            if ( std::find( unobservable.begin(), unobservable.end(), f ) == unobservable.end() )
                throw InputDomainError( "fault '" + f + "' must be declared unobservable" );
        for ( const auto* list : { &unobservable, &faults, &actions } )
            for ( const auto& label : *list )
                if ( label.empty() )
                    throw InputDomainError( "manifest labels must be non-empty" );
    }
};

[[nodiscard]] inline Manifest load_manifest( std::string_view text )
{
    nlohmann::json doc;
    try
    {
        doc = nlohmann::json::parse( text );
    }
    catch ( const nlohmann::json::parse_error& e )
    {
        throw InputDomainError( std::string( "malformed manifest: " ) + e.what() );
    }
    if ( !doc.is_object() )
        throw InputDomainError( "malformed manifest: expected a JSON object" );
    auto strings = [ & ]( const char* key ) {
        std::vector<std::string> out;
        if ( !doc.contains( key ) )
            return out;
        const auto& value = doc.at( key );
        if ( !value.is_array() )
            throw InputDomainError( std::string( "malformed manifest: '" ) + key + "' must be an array" );
        for ( const auto& item : value )
        {
            if ( !item.is_string() )
                throw InputDomainError( std::string( "malformed manifest: '" ) + key + "' must hold strings" );
            out.push_back( item.get<std::string>() );
        }
        return out;
    };
    Manifest manifest;
    manifest.unobservable = strings( "unobservable" );
    manifest.faults = strings( "faults" );
    manifest.actions = strings( "actions" );
    if ( doc.contains( "name" ) )
    {
        if ( !doc.at( "name" ).is_string() )
            throw InputDomainError( "malformed manifest: 'name' must be a string" );
        manifest.name = doc.at( "name" ).get<std::string>();
    }
    manifest.validate();
    return manifest;
}

/// Manifest describing exactly the alphabet of `lts`.
[[nodiscard]] inline Manifest manifest_for( const Lts& lts )
{
    Manifest m;
    const auto& sigma = lts.alphabet();
    m.faults = sigma.labels_of( ActionKind::Fault );
    m.unobservable = sigma.labels_of( ActionKind::Unobservable );
    m.unobservable.insert( m.unobservable.end(), m.faults.begin(), m.faults.end() );
    std::sort( m.unobservable.begin(), m.unobservable.end() );
    m.actions = sigma.labels();
    std::sort( m.actions.begin(), m.actions.end() );
    m.name = lts.name();
    return m;
}

[[nodiscard]] inline std::string write_manifest( const Manifest& m )
{
    nlohmann::json doc;
    if ( !m.name.empty() )
        doc[ "name" ] = m.name;
    doc[ "unobservable" ] = m.unobservable;
    doc[ "faults" ] = m.faults;
    if ( !m.actions.empty() )
        doc[ "actions" ] = m.actions;
    return doc.dump( 2 ) + "\n";
}

struct ParsedAut
{
    Lts lts;
    std::vector<std::string> warnings;
};

namespace detail
{

class AutScanner
{
public:
    AutScanner( std::string_view line, std::size_t line_number ) : _line{ line }, _number{ line_number } {}

    void skip_space()
    {
        while ( _pos < _line.size() && ( _line[ _pos ] == ' ' || _line[ _pos ] == '\t' || _line[ _pos ] == '\r' ) )
            ++_pos;
    }

    [[noreturn]] void fail( const std::string& message ) const { throw ParseError( _number, _pos + 1, message ); }

    void expect( char c )
    {
        skip_space();
        if ( _pos >= _line.size() || _line[ _pos ] != c )
            fail( std::string( "expected '" ) + c + "'" );
        ++_pos;
    }

    void expect_word( std::string_view word )
    {
        skip_space();
        if ( _line.substr( _pos, word.size() ) != word )
            fail( "expected '" + std::string( word ) + "'" );
        _pos += word.size();
    }

    std::uint64_t number()
    {
        skip_space();
        auto begin = _pos;
        while ( _pos < _line.size() && std::isdigit( static_cast<unsigned char>( _line[ _pos ] ) ) )
            ++_pos;
        if ( begin == _pos )
            fail( "expected a non-negative integer" );
        std::uint64_t value = 0;
        auto [ ptr, ec ] = std::from_chars( _line.data() + begin, _line.data() + _pos, value );
        if ( ec != std::errc{} || value > std::numeric_limits<StateId>::max() - 1 )
        {
            _pos = begin;
            fail( "integer out of range" );
        }
        return value;
    }

    std::string label()
    {
        skip_space();
        if ( _pos < _line.size() && _line[ _pos ] == '"' )
        {
            auto begin = ++_pos;
            while ( _pos < _line.size() && _line[ _pos ] != '"' )
                ++_pos;
            if ( _pos >= _line.size() )
                fail( "unterminated label" );
            std::string out( _line.substr( begin, _pos - begin ) );
            ++_pos;
            if ( out.empty() )
                fail( "empty label" );
            return out;
        }
        auto begin = _pos;
        while ( _pos < _line.size() &&
                ( std::isalnum( static_cast<unsigned char>( _line[ _pos ] ) ) || _line[ _pos ] == '_' ) )
            ++_pos;
        if ( begin == _pos )
            fail( "expected a label" );
        return std::string( _line.substr( begin, _pos - begin ) );
    }

    void expect_end()
    {
        skip_space();
        if ( _pos != _line.size() )
            fail( "unexpected trailing characters" );
    }

private:
    std::string_view _line;
    std::size_t _number;
    std::size_t _pos = 0;
};

[[nodiscard]] inline bool blank( std::string_view line )
{
    return std::all_of( line.begin(), line.end(),
                        []( char c ) { return c == ' ' || c == '\t' || c == '\r'; } );
}

} // namespace detail

inline constexpr std::size_t max_aut_states = std::size_t{ 1 } << 24;

/// Parses `des (<initial>, <transitions>, <states>)` followed by one
/// `(<from>,"<label>",<to>)` line per transition.
[[nodiscard]] inline ParsedAut parse_aut( std::string_view text, const Manifest& manifest, std::string name = {} )
{
    manifest.validate();
    std::vector<std::string_view> lines;
    for ( std::size_t begin = 0; begin <= text.size(); )
    {
        auto end = text.find( '\n', begin );
        if ( end == std::string_view::npos )
            end = text.size();
        lines.push_back( text.substr( begin, end - begin ) );
        begin = end + 1;
    }

    std::size_t i = 0;
    while ( i < lines.size() && detail::blank( lines[ i ] ) )
        ++i;
    if ( i == lines.size() )
        throw ParseError( lines.size(), 1, "missing 'des' header" );

    detail::AutScanner header( lines[ i ], i + 1 );
    header.expect_word( "des" );
    header.expect( '(' );
    auto initial = header.number();
    header.expect( ',' );
    auto declared_transitions = header.number();
    header.expect( ',' );
    auto num_states = header.number();
    header.expect( ')' );
    header.expect_end();
    if ( num_states == 0 )
        throw ParseError( i + 1, 1, "state count must be positive" );
    if ( num_states > max_aut_states )
        throw ParseError( i + 1, 1, "state count exceeds " + std::to_string( max_aut_states ) );
    if ( initial >= num_states )
        throw ParseError( i + 1, 1, "initial state " + std::to_string( initial ) + " >= state count" );

    Alphabet alphabet;
    std::vector<Transition> transitions;
    std::size_t transition_lines = 0;
    for ( ++i; i < lines.size(); ++i )
    {
        if ( detail::blank( lines[ i ] ) )
            continue;
        detail::AutScanner line( lines[ i ], i + 1 );
        line.expect( '(' );
        auto from = line.number();
        line.expect( ',' );
        auto label = line.label();
        line.expect( ',' );
        auto to = line.number();
        line.expect( ')' );
        line.expect_end();
        if ( from >= num_states || to >= num_states )
            throw ParseError( i + 1, 1,
                              "state index " + std::to_string( std::max( from, to ) ) + " >= state count " +
                                      std::to_string( num_states ) );
        auto action = alphabet.add( label, manifest.classify( label ) );
        transitions.push_back( { static_cast<StateId>( from ), action, static_cast<StateId>( to ) } );
        ++transition_lines;
    }
    for ( const auto& label : manifest.actions )
        alphabet.add( label, manifest.classify( label ) );

    std::vector<std::string> warnings;
    if ( transition_lines != declared_transitions )
        warnings.push_back( "header declares " + std::to_string( declared_transitions ) + " transitions but " +
                            std::to_string( transition_lines ) + " were read" );
    if ( name.empty() )
        name = manifest.name;
    return { Lts( std::move( alphabet ), num_states, static_cast<StateId>( initial ), std::move( transitions ),
                  std::move( name ) ),
             std::move( warnings ) };
}

/// Header plus one line per transition, sorted by (from, label, to).
[[nodiscard]] inline std::string write_aut( const Lts& lts )
{
    struct Line
    {
        StateId from;
        const std::string* label;
        StateId to;
    };
    std::vector<Line> lines;
    for ( const auto& t : lts.transitions() )
        lines.push_back( { t.source, &lts.alphabet().label( t.action ), t.target } );
    std::sort( lines.begin(), lines.end(), []( const Line& a, const Line& b ) {
        if ( a.from != b.from )
            return a.from < b.from;
        if ( *a.label != *b.label )
            return *a.label < *b.label;
        return a.to < b.to;
    } );
    std::ostringstream out;
    out << "des (" << lts.initial() << ", " << lines.size() << ", " << lts.num_states() << ")\n";
    for ( const auto& l : lines )
        out << '(' << l.from << ",\"" << *l.label << "\"," << l.to << ")\n";
    return out.str();
}

namespace detail
{

[[nodiscard]] inline std::string dot_quote( std::string_view text )
{
    std::string out = "\"";
    for ( char c : text )
    {
        if ( c == '"' || c == '\\' )
            out += '\\';
        out += c;
    }
    return out + "\"";
}

} // namespace detail

/// Graphviz rendering: initial state double-circled, fault edges red and
/// bold, unobservable edges dashed.
[[nodiscard]] inline std::string to_dot( const Lts& lts )
{
    std::ostringstream out;
    out << "digraph " << detail::dot_quote( lts.name().empty() ? "lts" : lts.name() ) << " {\n";
    out << "  rankdir=TB;\n";
    out << "  node [shape=circle];\n";
    for ( StateId q = 0; q < lts.num_states(); ++q )
    {
        out << "  s" << q << " [label=\"" << q << "\"";
        if ( q == lts.initial() )
            out << ", shape=doublecircle";
        out << "];\n";
    }
    auto transitions = lts.transitions();
    std::sort( transitions.begin(), transitions.end(), [ & ]( const Transition& a, const Transition& b ) {
        const auto& la = lts.alphabet().label( a.action );
        const auto& lb = lts.alphabet().label( b.action );
        return std::tie( a.source, la, a.target ) < std::tie( b.source, lb, b.target );
    } );
    for ( const auto& t : transitions )
    {
        out << "  s" << t.source << " -> s" << t.target << " [label=" << detail::dot_quote( lts.alphabet().label( t.action ) );
        switch ( lts.alphabet().kind( t.action ) )
        {
        case ActionKind::Fault:
            out << ", color=red, fontcolor=red, style=bold";
            break;
        case ActionKind::Unobservable:
            out << ", style=dashed";
            break;
        case ActionKind::Observable:
            break;
        }
        out << "];\n";
    }
    out << "}\n";
    return out.str();
}

} // namespace distdiag
