#ifndef ARMORPARSE_ARMORPARSE_HPP
#define ARMORPARSE_ARMORPARSE_HPP

#include "ast.hpp"
#include "attack.hpp"
#include "codec.hpp"
#include "compiled.hpp"
#include "corpus.hpp"
#include "diagnostics.hpp"
#include "fuzz.hpp"
#include "grammar.hpp"
#include "lexer.hpp"
#include "meta_parser.hpp"
#include "mutate.hpp"
#include "parse_engine.hpp"
#include "reduction.hpp"
#include "template_engine.hpp"
#include "text.hpp"
#include "unparse_engine.hpp"
#include "validate.hpp"

#endif
