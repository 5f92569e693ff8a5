#pragma once

#include "rira/arnoldi.hpp"
#include "rira/csr.hpp"
#include "rira/errors.hpp"
#include "rira/generators.hpp"
#include "rira/hessenberg.hpp"
#include "rira/matrix_market.hpp"
#include "rira/ortho.hpp"
#include "rira/report_io.hpp"
#include "rira/sketch.hpp"
#include "rira/solver.hpp"
