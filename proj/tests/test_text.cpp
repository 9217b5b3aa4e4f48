#include "doctest.h"
#include "plucase/text.hpp"

using namespace plucase;

TEST_SUITE("text") {

TEST_CASE("trim strips surrounding whitespace") {
  CHECK(text::trim("  hello \t") == "hello");
  CHECK(text::trim("hello") == "hello");
  CHECK(text::trim(" \t \r\n") == "");
  CHECK(text::trim("") == "");
}

TEST_CASE("to_lower") {
  CHECK(text::to_lower("The SYSTEM") == "the system");
  CHECK(text::to_lower("abc-123") == "abc-123");
}

TEST_CASE("starts_with") {
  CHECK(text::starts_with("INCLUDE USE CASE X", "INCLUDE "));
  CHECK_FALSE(text::starts_with("INCLUDE", "INCLUDE "));
  CHECK(text::starts_with("", ""));
}

TEST_CASE("normalize_phrase tokenizes and drops articles") {
  auto t = text::normalize_phrase("The move capacitance is stable.");
  CHECK(t == std::vector<std::string>{"move", "capacitance", "is", "stable"});

  t = text::normalize_phrase("a valid kick (status)!");
  CHECK(t == std::vector<std::string>{"valid", "kick", "status"});

  t = text::normalize_phrase("An  ERROR,with,commas");
  CHECK(t == std::vector<std::string>{"error", "with", "commas"});

  CHECK(text::normalize_phrase("the a an").empty());
  CHECK(text::normalize_phrase("").empty());
}

TEST_CASE("normalize_phrase keeps digits inside tokens") {
  auto t = text::normalize_phrase("stage 1 recalibrates");
  CHECK(t == std::vector<std::string>{"stage", "1", "recalibrates"});
}

TEST_CASE("contains_token_seq requires a contiguous run") {
  std::vector<std::string> hay{"move", "capacitance", "is", "stable"};
  CHECK(text::contains_token_seq(hay, {"move", "capacitance"}));
  CHECK(text::contains_token_seq(hay, {"is", "stable"}));
  CHECK(text::contains_token_seq(hay, hay));
  CHECK_FALSE(text::contains_token_seq(hay, {"move", "is"}));
  CHECK_FALSE(text::contains_token_seq(hay, {"capacitance", "move"}));
  CHECK_FALSE(text::contains_token_seq(hay, {"stable", "extra"}));
}

TEST_CASE("contains_token_seq matches whole tokens only") {
  std::vector<std::string> hay{"movement", "is", "valid"};
  CHECK_FALSE(text::contains_token_seq(hay, {"move"}));
  CHECK(text::contains_token_seq(hay, {"movement"}));
}

TEST_CASE("empty needle always matches") {
  CHECK(text::contains_token_seq({"x"}, {}));
  CHECK(text::contains_token_seq({}, {}));
  CHECK_FALSE(text::contains_token_seq({}, {"x"}));
}

}
