#ifndef DPINFER_DPINFER_HPP
#define DPINFER_DPINFER_HPP

#include "dpinfer/censored_mle.hpp"
#include "dpinfer/crossfit.hpp"
#include "dpinfer/csv.hpp"
#include "dpinfer/data_model.hpp"
#include "dpinfer/error.hpp"
#include "dpinfer/inference.hpp"
#include "dpinfer/normal.hpp"
#include "dpinfer/propagation.hpp"
#include "dpinfer/simlab.hpp"
#include "dpinfer/smoothing.hpp"
#include "dpinfer/stats.hpp"

#endif  // DPINFER_DPINFER_HPP
