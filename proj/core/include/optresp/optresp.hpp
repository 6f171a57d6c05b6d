#pragma once

#include "optresp/certify.hpp"
#include "optresp/error.hpp"
#include "optresp/grid.hpp"
#include "optresp/io.hpp"
#include "optresp/map.hpp"
#include "optresp/noise.hpp"
#include "optresp/optimal.hpp"
#include "optresp/quadrature.hpp"
#include "optresp/reflection.hpp"
#include "optresp/response.hpp"
#include "optresp/spectral.hpp"
#include "optresp/transfer.hpp"
