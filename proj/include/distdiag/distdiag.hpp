#pragma once

#include "aut.hpp"
#include "compose.hpp"
#include "diagnose.hpp"
#include "errors.hpp"
#include "isomorphism.hpp"
#include "lts.hpp"
#include "oracle.hpp"
#include "orchestrate.hpp"
#include "random.hpp"
#include "reduce.hpp"
#include "report.hpp"
