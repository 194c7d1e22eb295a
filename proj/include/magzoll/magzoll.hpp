#pragma once

#include "bessel.hpp"
#include "corpus.hpp"
#include "error.hpp"
#include "figure.hpp"
#include "flow.hpp"
#include "integrable.hpp"
#include "parallel.hpp"
#include "periodic.hpp"
#include "quadrature.hpp"
#include "report.hpp"
#include "roots.hpp"
#include "spec_file.hpp"
#include "system.hpp"
#include "systolic.hpp"
#include "zoll.hpp"
