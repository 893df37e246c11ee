#pragma once

#include "otdual/certificate.hpp"
#include "otdual/certify.hpp"
#include "otdual/convex_family.hpp"
#include "otdual/extended_real.hpp"
#include "otdual/lp.hpp"
#include "otdual/model.hpp"
#include "otdual/problem.hpp"
#include "otdual/solvers.hpp"
