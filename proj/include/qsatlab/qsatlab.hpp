#pragma once

#include "qsatlab/bounds.hpp"
#include "qsatlab/ensemble.hpp"
#include "qsatlab/error.hpp"
#include "qsatlab/hypergraph.hpp"
#include "qsatlab/instance.hpp"
#include "qsatlab/io.hpp"
#include "qsatlab/kernel.hpp"
#include "qsatlab/rng.hpp"
#include "qsatlab/transfer.hpp"
