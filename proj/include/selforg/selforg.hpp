#ifndef SELFORG_SELFORG_HPP
#define SELFORG_SELFORG_HPP

#include "selforg/analysis.hpp"
#include "selforg/commands.hpp"
#include "selforg/config.hpp"
#include "selforg/dynamics.hpp"
#include "selforg/ensemble.hpp"
#include "selforg/geometry.hpp"
#include "selforg/greens.hpp"
#include "selforg/io.hpp"
#include "selforg/params.hpp"
#include "selforg/potentials.hpp"
#include "selforg/rk45.hpp"
#include "selforg/rng.hpp"
#include "selforg/zpm.hpp"

#endif
