#pragma once

#include "oovt/seq2seq/char_vocab.hpp"
#include "oovt/seq2seq/config.hpp"
#include "oovt/seq2seq/network.hpp"
#include "oovt/seq2seq/trainer.hpp"
