#pragma once

/// Everything except the command-line front end.

#include <dihedral/bessel.hpp>
#include <dihedral/clifford.hpp>
#include <dihedral/comparison.hpp>
#include <dihedral/corner_smoothing.hpp>
#include <dihedral/curvature.hpp>
#include <dihedral/domain.hpp>
#include <dihedral/errors.hpp>
#include <dihedral/expr.hpp>
#include <dihedral/index_lab.hpp>
#include <dihedral/json_io.hpp>
#include <dihedral/metric.hpp>
#include <dihedral/quadrature.hpp>
#include <dihedral/sector_spectra.hpp>
