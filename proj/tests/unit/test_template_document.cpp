#include <doctest.h>

#include "rfidtrace/codec/template_document.hpp"

using namespace rfidtrace::codec;

TEST_CASE("template document parses and serializes") {
  const auto t = parse_template_document(R"({
    "template_id": 7, "version": 1, "name": "asset",
    "fields": [
      {"name": "loc", "type": "string", "max_len": 8},
      {"name": "qty", "type": "integer"},
      {"name": "price", "type": "real"},
      {"name": "grade", "type": "character"}
    ]})");
  CHECK(t.template_id == 7);
  CHECK(t.version == 1);
  REQUIRE(t.fields.size() == 4);
  CHECK(t.fields[0].type == FieldType::string(8));
  CHECK(t.fields[3].type == FieldType::character());
  CHECK(template_from_json(template_to_json(t)) == t);
}

TEST_CASE("template document rejects malformed input") {
  auto code_of = [](const char* text) {
    try {
      parse_template_document(text);
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::TypeMismatch;  // sentinel: accepted
  };
  CHECK(code_of("not json") == Errc::BadDocument);
  CHECK(code_of(R"({"template_id": 70000, "version": 0, "name": "x", "fields": []})") == Errc::BadDocument);
  CHECK(code_of(R"({"template_id": 1, "version": 0, "name": "x", "fields": [], "extra": 1})") ==
        Errc::BadDocument);
  CHECK(code_of(R"({"template_id": 1, "version": 0, "name": "x",
                    "fields": [{"name": "a", "type": "date"}]})") == Errc::BadDocument);
  CHECK(code_of(R"({"template_id": 1, "version": 0, "name": "x",
                    "fields": [{"name": "a", "type": "integer", "max_len": 3}]})") == Errc::BadDocument);
  CHECK(code_of(R"({"template_id": 1, "version": 0, "name": "x",
                    "fields": [{"name": "a", "type": "string"}]})") == Errc::BadDocument);
  CHECK(code_of(R"({"template_id": 1, "version": 0, "name": "x",
                    "fields": [{"name": "a", "type": "integer"}, {"name": "a", "type": "real"}]})") ==
        Errc::InvalidTemplate);
}

TEST_CASE("field values from json") {
  const FieldDef c{"c", FieldType::character()};
  const FieldDef s{"s", FieldType::string(4)};
  const FieldDef i{"i", FieldType::integer()};
  const FieldDef r{"r", FieldType::real()};
  CHECK(std::get<Character>(value_from_json(c, "Z")).value == 'Z');
  CHECK(std::get<Character>(value_from_json(c, 200)).value == 200);
  CHECK_THROWS_AS(value_from_json(c, "ZZ"), Error);
  CHECK(std::get<std::string>(value_from_json(s, "ab")) == "ab");
  CHECK(std::get<std::int32_t>(value_from_json(i, -5)) == -5);
  CHECK_THROWS_AS(value_from_json(i, 3000000000LL), Error);
  CHECK_THROWS_AS(value_from_json(i, 1.5), Error);
  CHECK(std::get<double>(value_from_json(r, 3)) == 3.0);
  CHECK(value_to_json(Character{'A'}) == "A");
  CHECK(value_to_json(Character{200}) == 200);
}
