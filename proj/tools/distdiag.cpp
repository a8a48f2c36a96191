// Command-line driver: validate, product, reduce, dot, check, bench.
//
// Exit codes: 0 diagnosable (or valid), 1 non-diagnosable (or invalid),
// 2 inconclusive, 3 usage error, 4 input error, 5 methods disagree,
// 6 analysis failure.

#include <distdiag/distdiag.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace
{

using namespace distdiag;

constexpr int exit_usage = 3;
constexpr int exit_input = 4;
constexpr int exit_soundness = 5;
constexpr int exit_failure = 6;

int exit_code( Status s )
{
    switch ( s )
    {
    case Status::Diagnosable:
        return 0;
    case Status::NonDiagnosable:
        return 1;
    case Status::Inconclusive:
        return 2;
    }
    return exit_failure;
}

class UsageError : public Error
{
public:
    using Error::Error;
};

std::string read_file( const std::string& path )
{
    std::ifstream in( path, std::ios::binary );
    if ( !in )
        throw InputDomainError( "cannot open '" + path + "'" );
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file( const std::string& path, const std::string& text )
{
    if ( path.empty() || path == "-" )
    {
        std::cout << text;
        return;
    }
    std::ofstream out( path, std::ios::binary );
    if ( !out || !( out << text ) )
        throw InputDomainError( "cannot write '" + path + "'" );
}

std::string stem( const std::string& path )
{
    auto slash = path.find_last_of( "/\\" );
    auto base = slash == std::string::npos ? path : path.substr( slash + 1 );
    auto dot = base.rfind( '.' );
    return dot == std::string::npos || dot == 0 ? base : base.substr( 0, dot );
}

struct Inputs
{
    std::vector<std::string> components;
    std::vector<std::string> manifests;
};

/// Labels listed in several manifests must be classified alike.
void check_manifest_conflicts( const std::vector<Manifest>& manifests, const std::vector<std::string>& paths )
{
    std::map<std::string, std::pair<ActionKind, std::string>> seen;
    for ( std::size_t k = 0; k < manifests.size(); ++k )
    {
        std::vector<std::string> listed = manifests[ k ].unobservable;
        listed.insert( listed.end(), manifests[ k ].faults.begin(), manifests[ k ].faults.end() );
        for ( const auto& label : listed )
        {
            auto kind = manifests[ k ].classify( label );
            auto [ it, fresh ] = seen.emplace( label, std::make_pair( kind, paths[ k ] ) );
            if ( !fresh && it->second.first != kind )
                throw InputDomainError( "manifests disagree on '" + label + "': " + to_string( it->second.first ) +
                                        " in " + it->second.second + ", " + to_string( kind ) + " in " + paths[ k ] );
        }
    }
}

std::vector<Lts> load_components( const Inputs& in )
{
    if ( in.components.empty() )
        throw UsageError( "at least one --component is required" );
    if ( in.manifests.size() > 1 && in.manifests.size() != in.components.size() )
        throw UsageError( "give one manifest for all components or one per component" );

    std::vector<Manifest> manifests;
    for ( const auto& path : in.manifests )
    {
        try
        {
            manifests.push_back( load_manifest( read_file( path ) ) );
        }
        catch ( const InputDomainError& e )
        {
            throw InputDomainError( path + ": " + e.what() );
        }
    }
    check_manifest_conflicts( manifests, in.manifests );

    std::vector<Lts> out;
    for ( std::size_t k = 0; k < in.components.size(); ++k )
    {
        const auto& path = in.components[ k ];
        const Manifest manifest = manifests.empty() ? Manifest{} : manifests[ manifests.size() == 1 ? 0 : k ];
        try
        {
            auto parsed = parse_aut( read_file( path ), manifest, manifest.name.empty() || manifests.size() == 1
                                                                       ? stem( path )
                                                                       : manifest.name );
            for ( const auto& w : parsed.warnings )
                std::cerr << path << ": warning: " << w << "\n";
            out.push_back( std::move( parsed.lts ) );
        }
        catch ( const ParseError& e )
        {
            throw Error( path + ": " + e.what() );
        }
    }
    return out;
}

void add_inputs( CLI::App* cmd, Inputs& in, bool many )
{
    if ( many )
        cmd->add_option( "-c,--component", in.components, "component .aut files" );
    else
        cmd->add_option( "-c,--component", in.components, "component .aut file" )->expected( 1 );
    cmd->add_option( "-m,--manifest", in.manifests, "alphabet manifest (one shared, or one per component)" );
}

} // namespace

int main( int argc, char** argv )
{
    CLI::App app{ "Diagnosability analysis of communicating labeled transition systems" };
    app.require_subcommand( 1 );

    Inputs in;
    std::string out_path, manifest_out, json_path, fault, method = "distributed";
    std::vector<std::string> faults;
    std::size_t parallelism = 1, budget = 0, reps = 5;
    bool fallback = false, no_symmetry = false;

    auto* validate = app.add_subcommand( "validate", "check liveness and the absence of unobservable cycles" );
    add_inputs( validate, in, false );

    auto* product = app.add_subcommand( "product", "write the synchronous product as .aut" );
    add_inputs( product, in, true );
    product->add_option( "-o,--out", out_path, "output .aut (default: stdout)" );
    product->add_option( "--manifest-out", manifest_out, "write the product's manifest here" );

    auto* reduce = app.add_subcommand( "reduce", "write the fault-free version of a component" );
    add_inputs( reduce, in, false );
    reduce->add_option( "-f,--fault", fault, "fault label" )->required();
    reduce->add_option( "-o,--out", out_path, "output .aut (default: stdout)" );
    reduce->add_option( "--manifest-out", manifest_out, "write the reduced component's manifest here" );

    auto* dot = app.add_subcommand( "dot", "write a Graphviz rendering" );
    add_inputs( dot, in, false );
    dot->add_option( "-o,--out", out_path, "output file (default: stdout)" );

    auto* check = app.add_subcommand( "check", "decide diagnosability" );
    add_inputs( check, in, true );
    check->add_option( "--method", method, "distributed or classic" )
            ->check( CLI::IsMember( { "distributed", "classic" } ) );
    check->add_option( "--faults", faults, "fault labels to analyze (default: all)" )->delimiter( ',' );
    check->add_option( "-j,--parallelism", parallelism, "concurrent checks" )->check( CLI::Range( 1, 256 ) );
    check->add_flag( "--fallback", fallback, "run the classic method when the distributed one is inconclusive" );
    check->add_option( "--budget", budget, "state budget of the classic product (0: none)" );
    check->add_flag( "--no-symmetry", no_symmetry, "build the full twin plant" );
    check->add_option( "--json", json_path, "write the report document here" );

    auto* bench = app.add_subcommand( "bench", "time both methods" );
    add_inputs( bench, in, true );
    bench->add_option( "--reps", reps, "repetitions" )->check( CLI::PositiveNumber );
    bench->add_option( "-j,--parallelism", parallelism, "concurrent checks" )->check( CLI::Range( 1, 256 ) );
    bench->add_option( "--budget", budget, "state budget of the classic product (0: none)" );
    bench->add_option( "--json", json_path, "write the bench document here" );

    try
    {
        app.parse( argc, argv );
    }
    catch ( const CLI::CallForHelp& e )
    {
        return app.exit( e );
    }
    catch ( const CLI::ParseError& e )
    {
        app.exit( e );
        return exit_usage;
    }

    try
    {
        auto plan_from = [ & ]( std::vector<Lts> components ) {
            AnalysisPlan plan;
            plan.components = std::move( components );
            plan.faults = faults;
            plan.method = method == "classic" ? Method::Classic : Method::Distributed;
            plan.parallelism = parallelism;
            plan.fallback_on_inconclusive = fallback;
            plan.classic_state_budget = budget;
            plan.symmetry = !no_symmetry;
            return plan;
        };

        if ( validate->parsed() )
        {
            auto g = load_components( in ).front();
            bool ok = true;
            if ( auto live = validate_live( g ); !live )
            {
                ok = false;
                std::cout << "not live: " << live.message << "\n";
            }
            if ( auto cycles = validate_no_unobservable_cycles( g ); !cycles )
            {
                ok = false;
                std::cout << "unobservable cycle: " << cycles.message << "\n";
            }
            if ( ok )
                std::cout << "valid: " << g.num_states() << " states, " << g.num_transitions() << " transitions\n";
            return ok ? 0 : 1;
        }
        if ( product->parsed() )
        {
            auto p = sync_product_n( load_components( in ) );
            write_file( out_path, write_aut( p.lts ) );
            if ( !manifest_out.empty() )
                write_file( manifest_out, write_manifest( manifest_for( p.lts ) ) );
            return 0;
        }
        if ( reduce->parsed() )
        {
            auto r = fault_free( load_components( in ).front(), fault );
            write_file( out_path, write_aut( r ) );
            if ( !manifest_out.empty() )
                write_file( manifest_out, write_manifest( manifest_for( r ) ) );
            return 0;
        }
        if ( dot->parsed() )
        {
            write_file( out_path, to_dot( load_components( in ).front() ) );
            return 0;
        }
        if ( check->parsed() )
        {
            auto plan = plan_from( load_components( in ) );
            AnalysisReport report;
            try
            {
                report = analyze( plan );
            }
            catch ( const AnalysisFailure& e )
            {
                std::cerr << "error: " << e.what() << "\n";
                std::cout << format_report( e.partial() );
                if ( !json_path.empty() )
                    write_file( json_path, Json( e.partial() ).dump( 2 ) + "\n" );
                return exit_failure;
            }
            std::cout << format_report( report );
            if ( !json_path.empty() )
                write_file( json_path, Json( report ).dump( 2 ) + "\n" );
            return exit_code( report.overall );
        }
        if ( bench->parsed() )
        {
            auto result = bench_compare( plan_from( load_components( in ) ), reps );
            std::cout << format_bench( result );
            if ( !json_path.empty() )
                write_file( json_path, Json( result ).dump( 2 ) + "\n" );
            return exit_code( result.verdict );
        }
    }
    catch ( const UsageError& e )
    {
        std::cerr << "usage error: " << e.what() << "\n";
        return exit_usage;
    }
    catch ( const SoundnessViolation& e )
    {
        std::cerr << "soundness alarm: " << e.what() << "\n";
        return exit_soundness;
    }
    catch ( const Error& e )
    {
        std::cerr << "error: " << e.what() << "\n";
        return exit_input;
    }
    return exit_usage;
}
