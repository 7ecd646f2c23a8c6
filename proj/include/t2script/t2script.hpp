#pragma once

#include "t2script/builtins.hpp"
#include "t2script/embed.hpp"
#include "t2script/interpreter.hpp"
