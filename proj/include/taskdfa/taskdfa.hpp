#pragma once

#include "taskdfa/alphabet.hpp"
#include "taskdfa/dfa.hpp"
#include "taskdfa/dfa_io.hpp"
#include "taskdfa/diss.hpp"
#include "taskdfa/error.hpp"
#include "taskdfa/examples.hpp"
#include "taskdfa/identify.hpp"
#include "taskdfa/learner.hpp"
#include "taskdfa/llm.hpp"
#include "taskdfa/oracle.hpp"
#include "taskdfa/planner.hpp"
#include "taskdfa/sat.hpp"
#include "taskdfa/tomita.hpp"
#include "taskdfa/tomita_bench.hpp"
#include "taskdfa/world.hpp"
