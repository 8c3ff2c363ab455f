#pragma once

#include "wulffkit/condition_s.hpp"
#include "wulffkit/core.hpp"
#include "wulffkit/dual.hpp"
#include "wulffkit/frame.hpp"
#include "wulffkit/lemmas.hpp"
#include "wulffkit/norm.hpp"
#include "wulffkit/patch.hpp"
#include "wulffkit/quadrature.hpp"
#include "wulffkit/sampling.hpp"
#include "wulffkit/symfunc.hpp"
#include "wulffkit/verify.hpp"
