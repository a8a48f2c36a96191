#pragma once

// Distributed and classic diagnosability pipelines.
//
// The distributed method checks, for every fault f and every component G_i
// that declares f, the product of G_i with the f-free versions of all other
// components, plus each component on its own. A non-diagnosable product
// decides the whole system; diagnosable products together with diagnosable
// components decide it the other way.

#include "compose.hpp"
#include "diagnose.hpp"
#include "errors.hpp"
#include "lts.hpp"
#include "reduce.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stop_token>
#include <string>
#include <thread>
#include <vector>

namespace distdiag
{

enum class Method : std::uint8_t
{
    Distributed,
    Classic,
};

[[nodiscard]] inline const char* to_string( Method m ) noexcept
{
    return m == Method::Distributed ? "distributed" : "classic";
}

struct AnalysisPlan
{
    std::vector<Lts> components;
    std::vector<std::string> faults; ///< empty: every declared fault
    Method method = Method::Distributed;
    std::size_t parallelism = 1;
    bool fallback_on_inconclusive = false;
    std::size_t classic_state_budget = 0; ///< 0: unlimited
    bool symmetry = true;
};

enum class TaskKind : std::uint8_t
{
    Product,   ///< G_i with the other components reduced
    SelfCheck, ///< G_i alone
};

[[nodiscard]] inline const char* to_string( TaskKind k ) noexcept
{
    return k == TaskKind::Product ? "product" : "self_check";
}

struct TaskReport
{
    TaskKind kind = TaskKind::Product;
    std::size_t component = 0; ///< faulty component (all components for classic)
    std::string fault;
    std::string subject;
    std::size_t estimate = 0; ///< product of the factors' state counts
    Verdict verdict;
};

enum class TimeModel : std::uint8_t
{
    Min, ///< non-diagnosable: the first conclusive task stops the others
    Max, ///< every task has to finish
    Sum, ///< sequential classic run
};

[[nodiscard]] inline const char* to_string( TimeModel t ) noexcept
{
    switch ( t )
    {
    case TimeModel::Min:
        return "min";
    case TimeModel::Max:
        return "max";
    case TimeModel::Sum:
        return "sum";
    }
    return "?";
}

struct AnalysisReport
{
    Method method = Method::Distributed;
    Status overall = Status::Inconclusive;
    std::string system;
    std::vector<TaskReport> tasks; ///< canonical order
    std::optional<std::size_t> deciding_task;
    double elapsed = 0.0;
    std::size_t cancellation_count = 0;
    TimeModel time_model = TimeModel::Max;
    double effective_time = 0.0;
    std::vector<std::string> alerts;
    std::shared_ptr<const AnalysisReport> fallback; ///< classic run, when one was made

    [[nodiscard]] const Verdict* deciding_verdict() const
    {
        return deciding_task ? &tasks.at( *deciding_task ).verdict : nullptr;
    }
};

/// Raised when a task fails; carries the verdicts collected so far.
class AnalysisFailure : public Error
{
public:
    AnalysisFailure( const std::string& what, AnalysisReport partial )
        : Error( what ), _partial{ std::make_shared<AnalysisReport>( std::move( partial ) ) }
    {
    }

    [[nodiscard]] const AnalysisReport& partial() const noexcept { return *_partial; }

private:
    std::shared_ptr<AnalysisReport> _partial;
};

namespace detail
{

using Clock = std::chrono::steady_clock;

[[nodiscard]] inline double seconds_since( Clock::time_point start )
{
    return std::chrono::duration<double>( Clock::now() - start ).count();
}

[[nodiscard]] inline std::size_t saturating_mul( std::size_t a, std::size_t b )
{
    if ( a != 0 && b > std::numeric_limits<std::size_t>::max() / a )
        return std::numeric_limits<std::size_t>::max();
    return a * b;
}

/// Fault labels under analysis, checked against the components.
[[nodiscard]] inline std::vector<std::string> plan_faults( const AnalysisPlan& plan )
{
    if ( plan.components.empty() )
        throw InputDomainError( "an analysis plan needs at least one component" );
    if ( plan.parallelism == 0 )
        throw InputDomainError( "parallelism must be at least 1" );
    std::set<std::string> declared;
    for ( const auto& c : plan.components )
        for ( const auto& f : c.alphabet().fault_labels() )
            declared.insert( f );
    if ( plan.faults.empty() )
        return { declared.begin(), declared.end() };
    std::set<std::string> chosen;
    for ( const auto& f : plan.faults )
    {
        if ( !declared.count( f ) )
            throw InputDomainError( "fault '" + f + "' is not declared by any component" );
        chosen.insert( f );
    }
    return { chosen.begin(), chosen.end() };
}

inline void validate_components( const AnalysisPlan& plan )
{
    static_cast<void>( merge_alphabets( plan.components ) );
    for ( const auto& c : plan.components )
        if ( auto cycles = validate_no_unobservable_cycles( c ); !cycles )
            throw InputDomainError( "component " + c.name() + ": " + cycles.message );
}

struct PlannedTask
{
    TaskReport report;
    std::vector<Lts> factors;
};

[[nodiscard]] inline bool canonical_less( const TaskReport& a, const TaskReport& b )
{
    return std::tie( a.estimate, a.kind, a.fault, a.component ) < std::tie( b.estimate, b.kind, b.fault, b.component );
}

[[nodiscard]] inline std::vector<PlannedTask> distributed_tasks( const AnalysisPlan& plan,
                                                                 const std::vector<std::string>& faults )
{
    const auto& comps = plan.components;
    std::vector<PlannedTask> tasks;
    for ( const auto& f : faults )
    {
        std::vector<Lts> reduced;
        for ( const auto& c : comps )
        {
            auto a = c.alphabet().find( f );
            reduced.push_back( a && c.alphabet().fault( *a ) ? fault_free( c, f ) : c );
        }
        for ( std::size_t i = 0; i < comps.size(); ++i )
        {
            auto a = comps[ i ].alphabet().find( f );
            if ( !a || !comps[ i ].alphabet().fault( *a ) )
                continue;

            PlannedTask product;
            product.report.kind = TaskKind::Product;
            product.report.component = i;
            product.report.fault = f;
            product.report.estimate = 1;
            for ( std::size_t j = 0; j < comps.size(); ++j )
            {
                product.factors.push_back( j == i ? comps[ j ] : reduced[ j ] );
                product.report.estimate = saturating_mul( product.report.estimate, product.factors.back().num_states() );
            }
            product.report.subject = product_name( product.factors );
            tasks.push_back( std::move( product ) );

            PlannedTask self;
            self.report.kind = TaskKind::SelfCheck;
            self.report.component = i;
            self.report.fault = f;
            self.report.estimate = comps[ i ].num_states();
            self.report.subject = comps[ i ].name().empty() ? "?" : comps[ i ].name();
            self.factors.push_back( comps[ i ] );
            tasks.push_back( std::move( self ) );
        }
    }
    std::sort( tasks.begin(), tasks.end(),
               []( const PlannedTask& a, const PlannedTask& b ) { return canonical_less( a.report, b.report ); } );
    return tasks;
}

/// Runs `tasks` on up to `parallelism` threads. A non-diagnosable product
/// task with estimate e stops every task whose estimate exceeds e; such
/// tasks are reported cancelled whether or not they got to finish, so the
/// outcome does not depend on scheduling.
class TaskPool
{
public:
    TaskPool( std::vector<PlannedTask>& tasks, bool symmetry ) : _tasks{ tasks }, _symmetry{ symmetry }
    {
        _stops.resize( tasks.size() );
        _running.assign( tasks.size(), false );
        for ( std::size_t k = 0; k < tasks.size(); ++k )
            _queue.push_back( k );
    }

    void run( std::size_t parallelism )
    {
        const auto workers = std::min( parallelism, _tasks.size() );
        {
            std::vector<std::jthread> threads;
            for ( std::size_t w = 0; w < workers; ++w )
                threads.emplace_back( [ this, w ] { work( w == 0 ); } );
        }
        if ( _cutoff == std::numeric_limits<std::size_t>::max() )
            return;
        for ( auto& t : _tasks )
            if ( t.report.estimate > _cutoff )
            {
                Verdict cancelled;
                cancelled.fault = t.report.fault;
                cancelled.cancelled = true;
                cancelled.stats.seconds = t.report.verdict.stats.seconds;
                t.report.verdict = std::move( cancelled );
                ++_cancellations;
            }
    }

    [[nodiscard]] std::size_t cancellations() const noexcept { return _cancellations; }
    [[nodiscard]] const std::optional<std::string>& error() const noexcept { return _error; }

private:
    // Worker 0 takes the smallest pending task, the others the largest: small
    // tasks finish (and may cancel) early while big ones start as soon as
    // possible. With one worker the total time does not depend on the order.
    std::optional<std::size_t> next( bool smallest_first )
    {
        std::lock_guard lock( _mutex );
        while ( !_queue.empty() )
        {
            std::size_t k = 0;
            if ( smallest_first )
            {
                k = _queue.front();
                _queue.pop_front();
            }
            else
            {
                k = _queue.back();
                _queue.pop_back();
            }
            if ( _error || _tasks[ k ].report.estimate > _cutoff )
                continue;
            _running[ k ] = true;
            return k;
        }
        return std::nullopt;
    }

    void work( bool smallest_first )
    {
        while ( auto k = next( smallest_first ) )
        {
            auto& task = _tasks[ *k ];
            const auto start = Clock::now();
            try
            {
                CheckOptions options{ _symmetry, { _stops[ *k ].get_token(), 0 } };
                Verdict verdict;
                if ( task.factors.size() == 1 )
                    verdict = check_diagnosable( task.factors.front(), task.report.fault, options );
                else
                {
                    auto product = sync_product_n( task.factors, options.limits );
                    verdict = check_diagnosable( product.lts, task.report.fault, options );
                }
                verdict.stats.seconds = seconds_since( start );
                finish( *k, std::move( verdict ) );
            }
            catch ( const Cancelled& )
            {
                Verdict verdict;
                verdict.fault = task.report.fault;
                verdict.cancelled = true;
                verdict.stats.seconds = seconds_since( start );
                finish( *k, std::move( verdict ) );
            }
            catch ( const std::exception& e )
            {
                fail( *k, task.report.subject + " [" + task.report.fault + "]: " + e.what() );
            }
        }
    }

    void finish( std::size_t k, Verdict verdict )
    {
        std::lock_guard lock( _mutex );
        _running[ k ] = false;
        auto& task = _tasks[ k ].report;
        const bool decisive = task.kind == TaskKind::Product && verdict.status == Status::NonDiagnosable;
        task.verdict = std::move( verdict );
        if ( decisive && task.estimate < _cutoff )
        {
            _cutoff = task.estimate;
            for ( std::size_t j = 0; j < _tasks.size(); ++j )
                if ( _running[ j ] && _tasks[ j ].report.estimate > _cutoff )
                    _stops[ j ].request_stop();
        }
    }

    void fail( std::size_t k, std::string message )
    {
        std::lock_guard lock( _mutex );
        _running[ k ] = false;
        if ( !_error )
            _error = std::move( message );
        for ( std::size_t j = 0; j < _tasks.size(); ++j )
            if ( _running[ j ] )
                _stops[ j ].request_stop();
    }

    std::vector<PlannedTask>& _tasks;
    bool _symmetry;
    std::mutex _mutex;
    std::deque<std::size_t> _queue;
    std::vector<std::stop_source> _stops;
    std::vector<bool> _running;
    std::size_t _cutoff = std::numeric_limits<std::size_t>::max();
    std::size_t _cancellations = 0;
    std::optional<std::string> _error;
};

} // namespace detail

/// Full synchronous product followed by a twin-plant check per fault.
[[nodiscard]] inline AnalysisReport classic_check( const AnalysisPlan& plan )
{
    const auto start = detail::Clock::now();
    const auto faults = detail::plan_faults( plan );
    detail::validate_components( plan );

    AnalysisReport report;
    report.method = Method::Classic;
    report.system = detail::product_name( plan.components );
    report.time_model = TimeModel::Sum;

    std::size_t estimate = 1;
    for ( const auto& c : plan.components )
        estimate = detail::saturating_mul( estimate, c.num_states() );

    const ExploreLimits limits{ {}, plan.classic_state_budget };
    std::optional<ProductLts> product;
    double build_seconds = 0.0;
    try
    {
        product = sync_product_n( plan.components, limits );
    }
    catch ( const BudgetExceeded& )
    {
        report.alerts.push_back( "product exceeds the state budget of " + std::to_string( plan.classic_state_budget ) );
    }
    build_seconds = detail::seconds_since( start );

    for ( const auto& f : faults )
    {
        TaskReport task;
        task.kind = TaskKind::Product;
        task.component = 0;
        task.fault = f;
        task.subject = report.system;
        task.estimate = estimate;
        if ( product )
            task.verdict = check_diagnosable( product->lts, f, { plan.symmetry, limits } );
        else
        {
            task.verdict.fault = f;
            task.verdict.capped = true;
        }
        report.tasks.push_back( std::move( task ) );
    }
    if ( !report.tasks.empty() )
        report.tasks.front().verdict.stats.seconds += build_seconds;

    FaultVerdicts verdicts;
    for ( const auto& t : report.tasks )
        verdicts.emplace( t.fault, t.verdict );
    report.overall = overall_status( verdicts );
    for ( std::size_t k = 0; k < report.tasks.size(); ++k )
        if ( report.tasks[ k ].verdict.status == Status::NonDiagnosable )
        {
            report.deciding_task = k;
            break;
        }
    report.elapsed = detail::seconds_since( start );
    report.effective_time = report.elapsed;
    return report;
}

/// Component-wise analysis with reduced partners, run in parallel.
[[nodiscard]] inline AnalysisReport distributed_check( const AnalysisPlan& plan )
{
    const auto start = detail::Clock::now();
    const auto faults = detail::plan_faults( plan );
    detail::validate_components( plan );

    AnalysisReport report;
    report.method = Method::Distributed;
    report.system = detail::product_name( plan.components );

    auto planned = detail::distributed_tasks( plan, faults );
    detail::TaskPool pool( planned, plan.symmetry );
    pool.run( plan.parallelism );
    for ( auto& t : planned )
        report.tasks.push_back( std::move( t.report ) );
    report.cancellation_count = pool.cancellations();

    auto classic_fallback = [ & ]( const std::string& reason ) {
        report.alerts.push_back( reason + "; falling back to the classic method" );
        AnalysisPlan classic = plan;
        classic.method = Method::Classic;
        auto sub = std::make_shared<AnalysisReport>( classic_check( classic ) );
        report.overall = sub->overall;
        report.fallback = std::move( sub );
    };

    if ( pool.error() )
    {
        report.overall = Status::Inconclusive;
        report.alerts.push_back( "task failed: " + *pool.error() );
        if ( !plan.fallback_on_inconclusive )
        {
            report.elapsed = detail::seconds_since( start );
            throw AnalysisFailure( "distributed analysis failed: " + *pool.error(), std::move( report ) );
        }
        classic_fallback( "a task failed" );
        report.elapsed = detail::seconds_since( start );
        report.effective_time = report.elapsed;
        return report;
    }

    bool products_diagnosable = true;
    std::vector<std::string> failing_components;
    for ( std::size_t k = 0; k < report.tasks.size(); ++k )
    {
        const auto& t = report.tasks[ k ];
        if ( t.kind == TaskKind::Product && t.verdict.status == Status::NonDiagnosable && !report.deciding_task )
            report.deciding_task = k;
        if ( t.kind == TaskKind::Product && t.verdict.status != Status::Diagnosable )
            products_diagnosable = false;
        if ( t.kind == TaskKind::SelfCheck && !t.verdict.cancelled && t.verdict.status != Status::Diagnosable )
            failing_components.push_back( t.subject + " [" + t.fault + "]" );
    }

    double min_time = std::numeric_limits<double>::infinity();
    double max_time = 0.0;
    for ( const auto& t : report.tasks )
    {
        if ( t.verdict.cancelled )
            continue;
        max_time = std::max( max_time, t.verdict.stats.seconds );
        if ( t.kind == TaskKind::Product && t.verdict.status == Status::NonDiagnosable )
            min_time = std::min( min_time, t.verdict.stats.seconds );
    }

    if ( report.deciding_task )
    {
        report.overall = Status::NonDiagnosable;
        report.time_model = TimeModel::Min;
        report.effective_time = min_time;
        for ( const auto& c : failing_components )
            report.alerts.push_back( "component " + c + " is not diagnosable on its own" );
    }
    else
    {
        report.time_model = TimeModel::Max;
        report.effective_time = max_time;
        if ( !products_diagnosable )
        {
            report.overall = Status::Inconclusive;
            report.alerts.push_back( "some reduced product could not be decided" );
        }
        else if ( failing_components.empty() )
            report.overall = Status::Diagnosable;
        else
        {
            report.overall = Status::Inconclusive;
            for ( const auto& c : failing_components )
                report.alerts.push_back( "component " + c + " is not diagnosable on its own" );
        }
        if ( report.overall == Status::Inconclusive && plan.fallback_on_inconclusive )
            classic_fallback( "distributed analysis is inconclusive" );
    }
    report.elapsed = detail::seconds_since( start );
    return report;
}

[[nodiscard]] inline AnalysisReport analyze( const AnalysisPlan& plan )
{
    return plan.method == Method::Distributed ? distributed_check( plan ) : classic_check( plan );
}

struct BenchRow
{
    double distributed_seconds = 0.0;
    double classic_seconds = 0.0;
    Status distributed = Status::Inconclusive;
    Status classic = Status::Inconclusive;
};

struct BenchReport
{
    std::string system;
    std::vector<BenchRow> rows;
    Status verdict = Status::Inconclusive; ///< common verdict, Inconclusive if none
    bool agreement = true;
    double distributed_mean = 0.0;
    double classic_mean = 0.0;
    double speedup = 0.0; ///< classic mean over distributed mean
};

/// Runs both methods `repetitions` times and compares them.
[[nodiscard]] inline BenchReport bench_compare( const AnalysisPlan& plan, std::size_t repetitions )
{
    if ( repetitions == 0 )
        throw InputDomainError( "bench needs at least one repetition" );
    BenchReport bench;
    bench.system = detail::product_name( plan.components );
    AnalysisPlan distributed = plan;
    distributed.method = Method::Distributed;
    distributed.fallback_on_inconclusive = false;
    AnalysisPlan classic = plan;
    classic.method = Method::Classic;

    for ( std::size_t r = 0; r < repetitions; ++r )
    {
        BenchRow row;
        auto d = distributed_check( distributed );
        auto c = classic_check( classic );
        row.distributed_seconds = d.elapsed;
        row.classic_seconds = c.elapsed;
        row.distributed = d.overall;
        row.classic = c.overall;
        if ( d.overall != Status::Inconclusive && c.overall != Status::Inconclusive && d.overall != c.overall )
            throw SoundnessViolation( "methods disagree on " + bench.system + ": distributed says " +
                                      to_string( d.overall ) + ", classic says " + to_string( c.overall ) );
        bench.distributed_mean += row.distributed_seconds;
        bench.classic_mean += row.classic_seconds;
        bench.rows.push_back( row );
    }
    bench.distributed_mean /= static_cast<double>( repetitions );
    bench.classic_mean /= static_cast<double>( repetitions );
    bench.speedup = bench.distributed_mean > 0 ? bench.classic_mean / bench.distributed_mean : 0.0;

    std::set<Status> seen;
    for ( const auto& row : bench.rows )
    {
        seen.insert( row.distributed );
        seen.insert( row.classic );
    }
    seen.erase( Status::Inconclusive );
    bench.agreement = seen.size() <= 1;
    bench.verdict = seen.size() == 1 ? *seen.begin() : Status::Inconclusive;
    return bench;
}

} // namespace distdiag
