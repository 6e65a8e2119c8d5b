#pragma once
#include "error.hpp"
#include "rat.hpp"
#include "fq.hpp"
#include "zq.hpp"
#include "matrix.hpp"
#include "perfseries.hpp"
#include "witt.hpp"
#include "period.hpp"
#include "polygon.hpp"
#include "robba.hpp"
#include "phimod.hpp"
#include "gamma.hpp"
#include "fitting.hpp"
