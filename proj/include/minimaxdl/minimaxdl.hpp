#ifndef MINIMAXDL_MINIMAXDL_HPP_
#define MINIMAXDL_MINIMAXDL_HPP_

#include "minimaxdl/core.hpp"
#include "minimaxdl/model.hpp"
#include "minimaxdl/geometry.hpp"
#include "minimaxdl/packing.hpp"
#include "minimaxdl/bounds.hpp"
#include "minimaxdl/infotheory.hpp"
#include "minimaxdl/learners.hpp"
#include "minimaxdl/io.hpp"

#endif  // MINIMAXDL_MINIMAXDL_HPP_
