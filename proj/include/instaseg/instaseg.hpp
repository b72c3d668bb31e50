#pragma once

#include "instaseg/components.hpp"
#include "instaseg/error.hpp"
#include "instaseg/io.hpp"
#include "instaseg/lanczos.hpp"
#include "instaseg/metrics.hpp"
#include "instaseg/morphology.hpp"
#include "instaseg/overlay.hpp"
#include "instaseg/phantom.hpp"
#include "instaseg/pipeline.hpp"
#include "instaseg/raster.hpp"
#include "instaseg/report.hpp"
#include "instaseg/threshold.hpp"
#include "instaseg/wilcoxon.hpp"
