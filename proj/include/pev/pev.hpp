#pragma once

#include "pev/controls.hpp"
#include "pev/csv.hpp"
#include "pev/dense_sym.hpp"
#include "pev/error.hpp"
#include "pev/lamination.hpp"
#include "pev/maximize.hpp"
#include "pev/mesh_fem.hpp"
#include "pev/parabolic.hpp"
#include "pev/random.hpp"
#include "pev/relax2d.hpp"
#include "pev/sparse_eigen.hpp"
