#pragma once

#include "driver.hpp"
#include "embedding.hpp"
#include "error.hpp"
#include "fairness.hpp"
#include "graph.hpp"
#include "groups.hpp"
#include "io.hpp"
#include "lp.hpp"
#include "partition.hpp"
#include "rational.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "rounding.hpp"
#include "sbm.hpp"
