#pragma once

#include "resp/error.hpp"
#include "resp/rational.hpp"
#include "resp/signature.hpp"
#include "resp/expression.hpp"
#include "resp/model.hpp"
#include "resp/causation.hpp"
#include "resp/responsibility.hpp"
#include "resp/dsl.hpp"
