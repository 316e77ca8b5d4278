#include "ncci/conditions.hpp"

#include "ncci/error.hpp"

namespace ncci {

SubjectForm parse_subject_form(std::string_view s) {
  if (s == "pronoun") return SubjectForm::Pronoun;
  if (s == "np" || s == "NP" || s == "noun_phrase") return SubjectForm::NounPhrase;
  throw InputError("unknown subject_form '" + std::string(s) + "' (expected pronoun|np)");
}

Number parse_number(std::string_view s) {
  if (s == "singular") return Number::Singular;
  if (s == "plural") return Number::Plural;
  if (s == "control") return Number::Control;
  throw InputError("unknown number '" + std::string(s) + "' (expected singular|plural|control)");
}

std::string to_string(SubjectForm f) { return f == SubjectForm::Pronoun ? "pronoun" : "np"; }

std::string to_string(Number n) {
  switch (n) {
    case Number::Singular: return "singular";
    case Number::Plural: return "plural";
    case Number::Control: return "control";
  }
  return "unknown";
}

std::string condition_name(SubjectForm f, Number n) { return to_string(f) + "_" + to_string(n); }

}  // namespace ncci
