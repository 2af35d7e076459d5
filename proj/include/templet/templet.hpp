#pragma once

#include "templet/ast.hpp"
#include "templet/bundled.hpp"
#include "templet/diagnostics.hpp"
#include "templet/graph_export.hpp"
#include "templet/lexer.hpp"
#include "templet/mapper.hpp"
#include "templet/parser.hpp"
#include "templet/printer.hpp"
#include "templet/runtime.hpp"
#include "templet/semantic.hpp"
#include "templet/source_model.hpp"
#include "templet/templates.hpp"
#include "templet/trace_io.hpp"
