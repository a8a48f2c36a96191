#pragma once

#include "errors.hpp"
#include "lts.hpp"

#include <string>
#include <string_view>

namespace distdiag
{

/// Fault-free version of `lts` for `fault`: the part reachable from the
/// initial state without firing `fault`, with every `fault` transition
/// dropped. The alphabet is kept intact, so the result synchronizes exactly
/// like the original. The result may have dead states.
[[nodiscard]] inline Lts fault_free( const Lts& lts, std::string_view fault )
{
    auto f = lts.alphabet().find( fault );
    if ( !f || !lts.alphabet().fault( *f ) )
        throw InputDomainError( "'" + std::string( fault ) + "' is not a declared fault of " +
                                ( lts.name().empty() ? std::string( "the component" ) : lts.name() ) );
    auto result = detail::restrict_reachable( lts, [ a = *f ]( StateId, const Edge& e ) { return e.action != a; } ).lts;
    if ( !lts.name().empty() )
        result = result.renamed( lts.name() + "^" + std::string( fault ) );
    return result;
}

/// Removes every fault transition at once, then keeps the reachable part.
[[nodiscard]] inline Lts fault_free_all( const Lts& lts )
{
    const auto& sigma = lts.alphabet();
    return detail::restrict_reachable( lts, [ & ]( StateId, const Edge& e ) { return !sigma.fault( e.action ); } )
            .lts;
}

} // namespace distdiag
