#pragma once

#include "hitab/answer.hpp"
#include "hitab/error.hpp"
#include "hitab/evaluate.hpp"
#include "hitab/extract.hpp"
#include "hitab/formula.hpp"
#include "hitab/ingest.hpp"
#include "hitab/interpreter.hpp"
#include "hitab/linearize.hpp"
#include "hitab/logical_form.hpp"
#include "hitab/search.hpp"
#include "hitab/table.hpp"
#include "hitab/text.hpp"
#include "hitab/value.hpp"
