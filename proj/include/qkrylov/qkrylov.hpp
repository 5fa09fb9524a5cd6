#pragma once

// Everything except the CLI layer.
#include "qkrylov/types.hpp"
#include "qkrylov/pauli.hpp"
#include "qkrylov/exact.hpp"
#include "qkrylov/references.hpp"
#include "qkrylov/krylov.hpp"
#include "qkrylov/rng.hpp"
#include "qkrylov/noise.hpp"
#include "qkrylov/gevp.hpp"
#include "qkrylov/filters.hpp"
#include "qkrylov/experiment.hpp"
#include "qkrylov/hamiltonian_io.hpp"
#include "qkrylov/records.hpp"
