#pragma once

#include <cmath>

inline double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }
