#ifndef MAGSYM_MAGSYM_HPP
#define MAGSYM_MAGSYM_HPP

#include "magsym/baselines.hpp"
#include "magsym/bench.hpp"
#include "magsym/decomposition.hpp"
#include "magsym/linalg.hpp"
#include "magsym/magnus.hpp"
#include "magsym/problem.hpp"
#include "magsym/problems.hpp"
#include "magsym/reference.hpp"
#include "magsym/splitting.hpp"
#include "magsym/types.hpp"

#endif
