#pragma once

#include <string>
#include <string_view>

namespace ncci {

// Form of the than-clause subject.
enum class SubjectForm { Pronoun, NounPhrase };

// Number of the than-clause subject; Control marks the acceptable baseline
// sentences of the rating experiment.
enum class Number { Singular, Plural, Control };

SubjectForm parse_subject_form(std::string_view s);
Number parse_number(std::string_view s);
std::string to_string(SubjectForm f);
std::string to_string(Number n);

// "pronoun_singular", "np_control", ...
std::string condition_name(SubjectForm f, Number n);

}  // namespace ncci
