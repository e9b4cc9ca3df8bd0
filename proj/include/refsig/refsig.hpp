#pragma once

#include "allan.hpp"
#include "analysis.hpp"
#include "baseline.hpp"
#include "cic.hpp"
#include "ddc.hpp"
#include "decimator.hpp"
#include "edgefind.hpp"
#include "error.hpp"
#include "fir_design.hpp"
#include "io/csv.hpp"
#include "io/framed.hpp"
#include "io/ring_buffer.hpp"
#include "io/sample_file.hpp"
#include "nco.hpp"
#include "savgol.hpp"
#include "sigmodel.hpp"
#include "stream.hpp"
