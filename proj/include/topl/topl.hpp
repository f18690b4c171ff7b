#pragma once
#ifndef TOPL_TOPL_HPP
#define TOPL_TOPL_HPP

#include "topl/adaptive_sampling.hpp"
#include "topl/bench.hpp"
#include "topl/blackbox.hpp"
#include "topl/brute_force.hpp"
#include "topl/cardinal.hpp"
#include "topl/errors.hpp"
#include "topl/estimators.hpp"
#include "topl/generators.hpp"
#include "topl/instance.hpp"
#include "topl/io.hpp"
#include "topl/mechanism.hpp"
#include "topl/meyerson.hpp"
#include "topl/oracle.hpp"
#include "topl/rng.hpp"

#endif  // TOPL_TOPL_HPP
