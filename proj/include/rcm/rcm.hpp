#pragma once

#include "rcm/cell_list.hpp"
#include "rcm/connection.hpp"
#include "rcm/errors.hpp"
#include "rcm/explorer.hpp"
#include "rcm/geometry.hpp"
#include "rcm/graph.hpp"
#include "rcm/identities.hpp"
#include "rcm/oracles.hpp"
#include "rcm/parallel.hpp"
#include "rcm/phi.hpp"
#include "rcm/random.hpp"
#include "rcm/replication.hpp"
#include "rcm/sampler.hpp"
#include "rcm/scaling.hpp"
#include "rcm/stats.hpp"
#include "rcm/tail.hpp"
#include "rcm/theta.hpp"
#include "rcm/thinning.hpp"
#include "rcm/union_find.hpp"
