#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pharmmt::sig {

enum class TokenKind { Word, Number, Fraction, Punctuation };

struct Token {
    std::string text;   // lowercased surface form
    TokenKind kind;
    std::size_t begin;  // character offsets into the original text
    std::size_t end;
};

/// Lowercases and splits direction text. Numbers (incl. decimals), fractions
/// `a/b` and adjacent mixed numbers `1 1/2` stay single tokens; punctuation is
/// split off; alpha/digit boundaries split (`x90` -> `x`, `90`).
std::vector<Token> tokenize(std::string_view text);

struct Quantity {
    double value = 0.0;
    std::string surface;

    // Decimal rendering, at most 2 fractional digits, trailing zeros trimmed.
    std::string canonical() const;
};

std::string render_decimal(double value);

/// Parses a recognized numeric token run (digits, decimals, fractions, mixed
/// numbers, word numbers like "one and half", "one ( 1 )"). Unrecognized forms
/// yield nullopt, never a wrong value.
std::optional<Quantity> parse_quantity(const std::vector<Token>& run);
std::optional<Quantity> parse_quantity(std::string_view text);

enum class ComponentTag { Action, Dosage, Form, Route, Frequency, Duration, Reason, Drug, Other };

std::string_view tag_name(ComponentTag tag);
std::optional<ComponentTag> tag_from_name(std::string_view name);

bool is_time_unit(std::string_view word);

/// Tagging dictionary. Entries are token-sequence patterns; `<n>` matches a
/// number or fraction token, `<unit>` matches a time-unit word.
class Lexicon {
  public:
    struct Entry {
        std::vector<std::string> pattern;
        ComponentTag tag;
        int priority;
        int order;  // file order, breaks priority ties
        // Numeric value the phrase denotes without spelling it out, e.g.
        // "bid" and "twice a day" both mean 2 per day. Only allowed on
        // patterns without <n> captures.
        std::optional<double> implied;
    };

    static Lexicon load(const std::string& path);
    static Lexicon parse(std::istream& in, const std::string& name = "<lexicon>");

    const std::vector<Entry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }

    void add(std::vector<std::string> pattern, ComponentTag tag, int priority,
             std::optional<double> implied = std::nullopt);

  private:
    std::vector<Entry> entries_;
};

/// A numeric run located inside a token stream: token span plus its
/// canonical quantity.
struct NumericRun {
    std::size_t begin;  // token index
    std::size_t length; // tokens covered
    Quantity quantity;
};

/// Finds all maximal numeric runs (digits, fractions, word-number phrases) in
/// token order.
std::vector<NumericRun> find_numeric_runs(const std::vector<Token>& tokens);

/// Canonical values of every numeric run in the tokens, in order.
std::vector<Quantity> all_quantities(const std::vector<Token>& tokens);
std::vector<Quantity> all_quantities(std::string_view text);

struct TaggedDirection {
    std::vector<Token> tokens;
    std::vector<ComponentTag> tags;  // one per token
    std::map<ComponentTag, std::vector<Quantity>> numerics;  // Dosage/Frequency/Duration
    // Values implied by matched lexicon phrases (token index of the match,
    // quantity), e.g. "bid" contributes a Frequency value of 2.
    std::vector<std::pair<std::size_t, Quantity>> implied;
};

/// Longest-match dictionary tagging; ties broken by priority then lexicon
/// order. Untagged numbers directly preceding a Form word become Dosage;
/// everything else unmatched is Other.
TaggedDirection tag_components(const std::vector<Token>& tokens, const Lexicon& lexicon);
TaggedDirection tag_components(std::string_view text, const Lexicon& lexicon);

/// Canonical quantities per component, token order. Components with no
/// numerics map to an empty list.
std::map<ComponentTag, std::vector<Quantity>> extract_numerics(const TaggedDirection& tagged);

/// Quantities in the direction that are not under a Dosage/Frequency/Duration
/// tag (the "untagged pool" the component checker tolerates).
std::vector<Quantity> untagged_quantities(const TaggedDirection& tagged);

}  // namespace pharmmt::sig
