#pragma once

// Fixture loading and small independent oracles shared by the test binaries.

#include <distdiag/distdiag.hpp>

#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace support
{

using namespace distdiag;

inline std::string read_text( const std::string& path )
{
    std::ifstream in( path, std::ios::binary );
    if ( !in )
        throw std::runtime_error( "cannot open " + path );
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

inline std::string fixture_path( const std::string& file ) { return std::string( DISTDIAG_FIXTURES ) + "/" + file; }

inline Manifest fixture_manifest() { return load_manifest( read_text( fixture_path( "manifest.json" ) ) ); }

inline Lts fixture( const std::string& name )
{
    return parse_aut( read_text( fixture_path( name + ".aut" ) ), fixture_manifest(), name ).lts;
}

/// All finite traces of length <= `max_len` from the initial state.
inline std::set<Trace> finite_traces( const Lts& lts, std::size_t max_len )
{
    std::set<Trace> out;
    std::set<std::pair<StateId, Trace>> frontier{ { lts.initial(), {} } };
    out.insert( {} );
    for ( std::size_t len = 0; len < max_len; ++len )
    {
        std::set<std::pair<StateId, Trace>> next;
        for ( const auto& [ q, t ] : frontier )
            for ( const auto& e : lts.out( q ) )
            {
                auto u = t;
                u.push_back( lts.alphabet().label( e.action ) );
                out.insert( u );
                next.emplace( e.target, std::move( u ) );
            }
        frontier = std::move( next );
    }
    return out;
}

inline bool contains( const Trace& t, const std::string& label )
{
    return std::find( t.begin(), t.end(), label ) != t.end();
}

struct PairCounts
{
    std::size_t states = 0;
    std::size_t transitions = 0;
};

/// Reachable part of a binary product, computed directly from the
/// composition rules on label strings.
inline PairCounts pair_product_oracle( const Lts& g1, const Lts& g2 )
{
    auto in = []( const Lts& g, const std::string& l ) { return g.alphabet().find( l ).has_value(); };
    auto kind = []( const Lts& g, const std::string& l ) { return g.alphabet().kind( *g.alphabet().find( l ) ); };
    auto succ = []( const Lts& g, StateId q, const std::string& l ) {
        std::vector<StateId> out;
        for ( const auto& e : g.out( q ) )
            if ( g.alphabet().label( e.action ) == l )
                out.push_back( e.target );
        return out;
    };
    std::set<std::string> labels;
    for ( const auto& l : g1.alphabet().labels() )
        labels.insert( l );
    for ( const auto& l : g2.alphabet().labels() )
        labels.insert( l );

    std::set<std::pair<StateId, StateId>> seen{ { g1.initial(), g2.initial() } };
    std::set<std::tuple<StateId, StateId, std::string, StateId, StateId>> edges;
    std::vector<std::pair<StateId, StateId>> work{ { g1.initial(), g2.initial() } };
    while ( !work.empty() )
    {
        auto [ p, q ] = work.back();
        work.pop_back();
        auto add = [ & ]( StateId p2, StateId q2, const std::string& l ) {
            edges.emplace( p, q, l, p2, q2 );
            if ( seen.emplace( p2, q2 ).second )
                work.emplace_back( p2, q2 );
        };
        for ( const auto& l : labels )
        {
            const bool both = in( g1, l ) && in( g2, l );
            if ( both && kind( g1, l ) == ActionKind::Observable )
            {
                for ( auto p2 : succ( g1, p, l ) )
                    for ( auto q2 : succ( g2, q, l ) )
                        add( p2, q2, l );
                continue;
            }
            if ( in( g1, l ) )
                for ( auto p2 : succ( g1, p, l ) )
                    add( p2, q, l );
            if ( in( g2, l ) )
                for ( auto q2 : succ( g2, q, l ) )
                    add( p, q2, l );
        }
    }
    return { seen.size(), edges.size() };
}

/// Recursive-descent check of the DOT subset used by renderers:
/// graph := 'digraph' ID? '{' stmt* '}'
/// stmt  := (ID '=' ID | ('node'|'edge'|'graph') attrs | ID ('->' ID)* attrs?) ';'?
class DotChecker
{
public:
    explicit DotChecker( std::string text ) : _s{ std::move( text ) } {}

    bool valid()
    {
        try
        {
            graph();
            skip();
            return _i == _s.size();
        }
        catch ( const std::runtime_error& )
        {
            return false;
        }
    }

    std::size_t nodes() const { return _nodes.size(); }
    std::size_t edges() const { return _edges.size(); }
    const std::vector<std::map<std::string, std::string>>& edge_attrs() const { return _edges; }

private:
    void skip()
    {
        while ( _i < _s.size() && std::isspace( static_cast<unsigned char>( _s[ _i ] ) ) )
            ++_i;
    }

    bool peek( const std::string& tok )
    {
        skip();
        return _s.compare( _i, tok.size(), tok ) == 0;
    }

    void expect( const std::string& tok )
    {
        if ( !peek( tok ) )
            throw std::runtime_error( "expected " + tok );
        _i += tok.size();
    }

    std::string id()
    {
        skip();
        if ( _i >= _s.size() )
            throw std::runtime_error( "eof" );
        if ( _s[ _i ] == '"' )
        {
            std::string out;
            ++_i;
            while ( _i < _s.size() && _s[ _i ] != '"' )
            {
                if ( _s[ _i ] == '\\' && _i + 1 < _s.size() )
                    ++_i;
                out += _s[ _i++ ];
            }
            expect( "\"" );
            return out;
        }
        std::size_t start = _i;
        while ( _i < _s.size() && ( std::isalnum( static_cast<unsigned char>( _s[ _i ] ) ) || _s[ _i ] == '_' ||
                                    _s[ _i ] == '.' ) )
            ++_i;
        if ( start == _i )
            throw std::runtime_error( "expected identifier" );
        return _s.substr( start, _i - start );
    }

    std::map<std::string, std::string> attrs()
    {
        std::map<std::string, std::string> out;
        expect( "[" );
        while ( !peek( "]" ) )
        {
            auto key = id();
            expect( "=" );
            out[ key ] = id();
            if ( peek( "," ) || peek( ";" ) )
                ++_i;
        }
        expect( "]" );
        return out;
    }

    void graph()
    {
        expect( "digraph" );
        if ( !peek( "{" ) )
            id();
        expect( "{" );
        while ( !peek( "}" ) )
        {
            if ( peek( "node" ) || peek( "edge" ) || peek( "graph" ) )
            {
                id();
                attrs();
            }
            else
            {
                auto first = id();
                if ( peek( "=" ) )
                {
                    ++_i;
                    id();
                }
                else
                {
                    std::vector<std::string> chain{ first };
                    while ( peek( "->" ) )
                    {
                        _i += 2;
                        chain.push_back( id() );
                    }
                    std::map<std::string, std::string> a;
                    if ( peek( "[" ) )
                        a = attrs();
                    if ( chain.size() == 1 )
                        _nodes.insert( first );
                    for ( std::size_t k = 1; k < chain.size(); ++k )
                        _edges.push_back( a );
                }
            }
            if ( peek( ";" ) )
                ++_i;
        }
        expect( "}" );
    }

    std::string _s;
    std::size_t _i = 0;
    std::set<std::string> _nodes;
    std::vector<std::map<std::string, std::string>> _edges;
};

/// Small random LTS for single-system properties.
inline Lts random_lts( std::uint64_t seed, std::size_t max_states = 8, double fault_probability = 0.25 )
{
    RandomParams p;
    p.components = 1;
    p.min_states = 1;
    p.max_states = max_states;
    p.shared_observables = 3;
    p.private_observables = 0;
    p.private_unobservables = 2;
    p.fault_probability = fault_probability;
    p.extra_transitions = 1.0;
    return generate_random_system( seed, p ).front();
}

/// C, D and a third component that idles on a private action until a shared
/// fault f sends it into a k-by-k torus of private x/y moves. The reduced
/// tasks around C and D are tiny and non-diagnosable; everything involving
/// the torus is large.
inline std::vector<Lts> cancellation_family( std::size_t k )
{
    Alphabet s;
    s.add( "p", ActionKind::Observable );
    s.add( "x", ActionKind::Observable );
    s.add( "y", ActionKind::Observable );
    s.add( "f", ActionKind::Fault );
    const auto p = s.at( "p" ), x = s.at( "x" ), y = s.at( "y" ), f = s.at( "f" );
    auto cell = [ k ]( std::size_t i, std::size_t j ) { return static_cast<StateId>( 1 + i * k + j ); };
    std::vector<Transition> edges{ { 0, p, 0 }, { 0, f, cell( 0, 0 ) } };
    for ( std::size_t i = 0; i < k; ++i )
        for ( std::size_t j = 0; j < k; ++j )
        {
            edges.push_back( { cell( i, j ), x, cell( ( i + 1 ) % k, j ) } );
            edges.push_back( { cell( i, j ), y, cell( i, ( j + 1 ) % k ) } );
        }
    return { fixture( "C" ), fixture( "D" ), Lts( s, 1 + k * k, 0, edges, "T" ) };
}

} // namespace support
