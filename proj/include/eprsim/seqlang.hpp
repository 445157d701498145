#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "eprsim/control.hpp"

namespace eprsim::seqlang {

/// .seq mini-language: line-oriented pulse schedules.
///
///   program := header stmt*            header := "sites" INT
///   stmt := "pulse" ("global" | "addressed") AXIS ANGLE targets? attrs*
///         | "ramp" ("on" | "off") targets "shift" FREQ ("dur" TIME)?
///         | "wait" TIME
///         | "measure" "basis" ANGLE targets?
///   targets := "@[" INT ("," INT)* "]"      AXIS := "x" | "y" | "z"
///   attrs := "rabi" FREQ | "dur" TIME | "virtual"
///
/// Angles take an optional 'deg' or 'rad' suffix (default rad).  Times
/// require a suffix: ns, us (or µs), ms, s.  Frequencies require Hz,
/// kHz, or MHz.  '#' starts a comment.  One statement per line.

enum class Severity { error, warning };

struct Diagnostic {
    Severity severity = Severity::error;
    std::string code;     // E0xx / W00x
    std::string message;
    int line = 0;         // 1-based
    int column = 0;       // 1-based, points into the offending token

    /// Stable rendering used by the CLI and the golden tests:
    /// "<line>:<col>: <severity> <code>: <message>"
    std::string render() const;
};

struct SrcSpan {
    int line = 0;
    int column = 0;
};

/// Numeric literal with its source spelling; the formatter reprints the
/// lexeme untouched, so unit styles survive round trips.
struct NumberLit {
    double value = 0.0;        // normalized: radians / seconds / Hz
    std::string lexeme;        // as written, including the suffix

    bool operator==(const NumberLit& o) const {
        return lexeme == o.lexeme && value == o.value;
    }
};

struct PulseStmt {
    bool addressed = false;
    Axis axis = Axis::x;
    NumberLit angle;
    std::vector<int> targets;  // empty = none written (global)
    bool has_targets = false;
    std::optional<NumberLit> rabi;
    std::optional<NumberLit> dur;
    bool virtual_flag = false;
    SrcSpan span;

    bool operator==(const PulseStmt& o) const {
        return addressed == o.addressed && axis == o.axis && angle == o.angle &&
               targets == o.targets && has_targets == o.has_targets &&
               rabi == o.rabi && dur == o.dur && virtual_flag == o.virtual_flag;
    }
};

struct RampStmt {
    bool on = false;
    std::vector<int> targets;
    NumberLit shift;
    std::optional<NumberLit> dur;
    SrcSpan span;

    bool operator==(const RampStmt& o) const {
        return on == o.on && targets == o.targets && shift == o.shift && dur == o.dur;
    }
};

struct WaitStmt {
    NumberLit time;
    SrcSpan span;

    bool operator==(const WaitStmt& o) const { return time == o.time; }
};

struct MeasureStmt {
    NumberLit angle;
    std::vector<int> targets;
    bool has_targets = false;
    SrcSpan span;

    bool operator==(const MeasureStmt& o) const {
        return angle == o.angle && targets == o.targets && has_targets == o.has_targets;
    }
};

/// Full-line comment, preserved verbatim by the formatter.
struct CommentStmt {
    std::string text;  // content after '#'
    SrcSpan span;

    bool operator==(const CommentStmt& o) const { return text == o.text; }
};

using Stmt = std::variant<PulseStmt, RampStmt, WaitStmt, MeasureStmt, CommentStmt>;

struct SeqProgram {
    int site_count = 0;
    std::vector<Stmt> statements;

    bool operator==(const SeqProgram& o) const {
        return site_count == o.site_count && statements == o.statements;
    }
};

struct ParseResult {
    std::optional<SeqProgram> program;  // present iff no error diagnostics
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return program.has_value(); }
};

/// Parse with recovery: errors are reported per line and parsing resumes
/// at the next statement boundary.
ParseResult parse(const std::string& text);

/// Echo-discipline lint.  Warnings only; never fails.
///   W001  addressed pulse outside an addressing ramp window
///   W002  unpaired echo: addressed pulses must pair up across an odd
///         number of global x pi-pulses
///   W003  addressing ramp never closed (or off without on)
std::vector<Diagnostic> lint(const SeqProgram& p);

/// Order-preserving translation to an executable Schedule: degrees to
/// radians, times to seconds.  Programs only exist when error-free, so
/// lowering is total.
Schedule lower(const SeqProgram& p);

/// Canonical formatting; parse(format(p)) is structurally equal to p and
/// format is idempotent.  Number lexemes are preserved as written.
std::string format(const SeqProgram& p);

/// Render a schedule produced by the control module back into canonical
/// .seq text (used by the scheme generators and the compile round trip).
SeqProgram program_from_schedule(const Schedule& s);

}  // namespace eprsim::seqlang
