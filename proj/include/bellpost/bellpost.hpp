#pragma once

#include "bellpost/analysis.hpp"
#include "bellpost/core.hpp"
#include "bellpost/detectors.hpp"
#include "bellpost/errors.hpp"
#include "bellpost/geometry.hpp"
#include "bellpost/lhv.hpp"
#include "bellpost/parallel.hpp"
#include "bellpost/postprocess.hpp"
#include "bellpost/quantum.hpp"
#include "bellpost/random.hpp"
#include "bellpost/rational.hpp"
#include "bellpost/serialization.hpp"
