#include "eprsim/seqlang.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <sstream>

namespace eprsim::seqlang {

namespace {

constexpr double pi = std::numbers::pi;

struct Tok {
    std::string text;
    int col = 0;  // 1-based
};

struct Line {
    std::vector<Tok> toks;
    std::optional<Tok> comment;  // full-line comment only
    int number = 0;
    int end_col = 1;
};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

Line tokenize_line(const std::string& text, int line_number) {
    Line line;
    line.number = line_number;
    std::size_t i = 0;
    bool at_line_start = true;
    while (i < text.size()) {
        if (is_space(text[i])) {
            ++i;
            continue;
        }
        if (text[i] == '#') {
            if (at_line_start) {
                line.comment = Tok{text.substr(i + 1), static_cast<int>(i + 1)};
            }
            break;  // trailing comments are dropped
        }
        at_line_start = false;
        const std::size_t start = i;
        if (text[i] == '@') {
            // target block @[ ... ]; spaces inside are tolerated
            while (i < text.size() && text[i] != ']') {
                ++i;
            }
            if (i < text.size()) {
                ++i;
            }
        } else {
            while (i < text.size() && !is_space(text[i]) && text[i] != '#') {
                ++i;
            }
        }
        line.toks.push_back({text.substr(start, i - start), static_cast<int>(start + 1)});
    }
    line.end_col = static_cast<int>(text.size()) + 1;
    return line;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    if (std::strtod(buf, nullptr) == v) {
        return buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class Parser {
  public:
    explicit Parser(const std::string& text) {
        std::istringstream in(text);
        std::string raw;
        int n = 0;
        while (std::getline(in, raw)) {
            lines_.push_back(tokenize_line(raw, ++n));
        }
    }

    ParseResult run() {
        SeqProgram prog;
        bool have_header = false;
        for (const auto& line : lines_) {
            if (line.comment) {
                prog.statements.push_back(
                    CommentStmt{line.comment->text, {line.number, line.comment->col}});
                continue;
            }
            if (line.toks.empty()) {
                continue;
            }
            const Tok& head = line.toks.front();
            if (head.text == "sites") {
                if (have_header) {
                    error("E007", "duplicate 'sites' header", line.number, head.col);
                    continue;
                }
                have_header = parse_header(line, prog);
                continue;
            }
            if (!have_header) {
                error("E007", "missing 'sites' header", line.number, head.col);
                // keep going so later lines still get diagnostics
                have_header = true;
                prog.site_count = 0;
            }
            parse_statement(line, prog);
        }
        if (!have_header) {
            error("E007", "missing 'sites' header",
                  static_cast<int>(lines_.size()) + 1, 1);
        }
        ParseResult result;
        result.diagnostics = std::move(diags_);
        bool has_error = false;
        for (const auto& d : result.diagnostics) {
            has_error |= d.severity == Severity::error;
        }
        if (!has_error) {
            result.program = std::move(prog);
        }
        return result;
    }

  private:
    std::vector<Line> lines_;
    std::vector<Diagnostic> diags_;
    int site_count_ = 0;

    void error(const std::string& code, const std::string& msg, int line, int col) {
        diags_.push_back({Severity::error, code, msg, line, col});
    }

    bool parse_header(const Line& line, SeqProgram& prog) {
        if (line.toks.size() < 2) {
            error("E007", "expected site count after 'sites'", line.number, line.end_col);
            return false;
        }
        char* end = nullptr;
        const long n = std::strtol(line.toks[1].text.c_str(), &end, 10);
        if (*end != '\0' || n < 1 || n > 1024) {
            error("E007", "invalid site count '" + line.toks[1].text + "'", line.number,
                  line.toks[1].col);
            return false;
        }
        if (line.toks.size() > 2) {
            error("E001", "unexpected trailing tokens", line.number, line.toks[2].col);
            return false;
        }
        prog.site_count = static_cast<int>(n);
        site_count_ = prog.site_count;
        return true;
    }

    bool parse_number(const Tok& tok, int line, double& value, std::string& suffix) {
        char* end = nullptr;
        value = std::strtod(tok.text.c_str(), &end);
        if (end == tok.text.c_str()) {
            error("E005", "invalid number '" + tok.text + "'", line, tok.col);
            return false;
        }
        if (!std::isfinite(value)) {
            error("E005", "non-finite number '" + tok.text + "'", line, tok.col);
            return false;
        }
        suffix = end;
        return true;
    }

    std::optional<NumberLit> parse_angle(const Tok& tok, int line) {
        double v = 0.0;
        std::string sfx;
        if (!parse_number(tok, line, v, sfx)) {
            return std::nullopt;
        }
        if (sfx == "deg") {
            return NumberLit{v * pi / 180.0, tok.text};
        }
        if (sfx == "rad" || sfx.empty()) {
            return NumberLit{v, tok.text};
        }
        error("E003", "unknown angle unit on '" + tok.text + "'", line, tok.col);
        return std::nullopt;
    }

    std::optional<NumberLit> parse_time(const Tok& tok, int line) {
        double v = 0.0;
        std::string sfx;
        if (!parse_number(tok, line, v, sfx)) {
            return std::nullopt;
        }
        double scale = 0.0;
        if (sfx == "ns") scale = 1e-9;
        else if (sfx == "us" || sfx == "µs") scale = 1e-6;
        else if (sfx == "ms") scale = 1e-3;
        else if (sfx == "s") scale = 1.0;
        if (scale == 0.0) {
            error("E003", "missing or unknown time unit on '" + tok.text + "'", line,
                  tok.col);
            return std::nullopt;
        }
        if (v < 0.0) {
            error("E005", "negative duration '" + tok.text + "'", line, tok.col);
            return std::nullopt;
        }
        return NumberLit{v * scale, tok.text};
    }

    std::optional<NumberLit> parse_freq(const Tok& tok, int line) {
        double v = 0.0;
        std::string sfx;
        if (!parse_number(tok, line, v, sfx)) {
            return std::nullopt;
        }
        double scale = 0.0;
        if (sfx == "Hz" || sfx == "hz") scale = 1.0;
        else if (sfx == "kHz" || sfx == "khz") scale = 1e3;
        else if (sfx == "MHz" || sfx == "mhz") scale = 1e6;
        if (scale == 0.0) {
            error("E003", "missing or unknown frequency unit on '" + tok.text + "'",
                  line, tok.col);
            return std::nullopt;
        }
        return NumberLit{v * scale, tok.text};
    }

    std::optional<std::vector<int>> parse_targets(const Tok& tok, int line) {
        const std::string& t = tok.text;
        if (t.size() < 3 || t[0] != '@' || t[1] != '[' || t.back() != ']') {
            error("E001", "malformed target list '" + t + "'", line, tok.col);
            return std::nullopt;
        }
        std::vector<int> out;
        std::size_t i = 2;
        bool expect_int = true;
        while (i + 1 < t.size()) {
            if (is_space(t[i])) {
                ++i;
                continue;
            }
            if (t[i] == ',') {
                if (expect_int) {
                    error("E001", "malformed target list '" + t + "'", line, tok.col);
                    return std::nullopt;
                }
                expect_int = true;
                ++i;
                continue;
            }
            if (!expect_int) {  // two sites without a separating comma
                error("E001", "malformed target list '" + t + "'", line, tok.col);
                return std::nullopt;
            }
            char* end = nullptr;
            const long v = std::strtol(t.c_str() + i, &end, 10);
            if (end == t.c_str() + i) {
                error("E001", "malformed target list '" + t + "'", line, tok.col);
                return std::nullopt;
            }
            if (v < 0 || (site_count_ > 0 && v >= site_count_)) {
                error("E004",
                      "site " + std::to_string(v) + " out of range (sites " +
                          std::to_string(site_count_) + ")",
                      line, tok.col);
                return std::nullopt;
            }
            if (std::find(out.begin(), out.end(), v) != out.end()) {
                error("E006", "duplicate target " + std::to_string(v), line, tok.col);
                return std::nullopt;
            }
            out.push_back(static_cast<int>(v));
            expect_int = false;
            i = static_cast<std::size_t>(end - t.c_str());
        }
        if (out.empty() || expect_int) {
            error("E001", "malformed target list '" + t + "'", line, tok.col);
            return std::nullopt;
        }
        return out;
    }

    void parse_statement(const Line& line, SeqProgram& prog) {
        const Tok& head = line.toks.front();
        if (head.text == "pulse") {
            parse_pulse(line, prog);
        } else if (head.text == "ramp") {
            parse_ramp(line, prog);
        } else if (head.text == "wait") {
            parse_wait(line, prog);
        } else if (head.text == "measure") {
            parse_measure(line, prog);
        } else {
            error("E001", "unknown statement '" + head.text + "'", line.number, head.col);
        }
    }

    const Tok* tok_at(const Line& line, std::size_t idx, const char* what) {
        if (idx >= line.toks.size()) {
            error("E001", std::string("expected ") + what, line.number, line.end_col);
            return nullptr;
        }
        return &line.toks[idx];
    }

    void parse_pulse(const Line& line, SeqProgram& prog) {
        const Tok* scope = tok_at(line, 1, "'global' or 'addressed'");
        if (!scope) return;
        bool addressed = false;
        if (scope->text == "addressed") {
            addressed = true;
        } else if (scope->text != "global") {
            error("E001", "expected 'global' or 'addressed', found '" + scope->text + "'",
                  line.number, scope->col);
            return;
        }
        const Tok* axis_tok = tok_at(line, 2, "axis");
        if (!axis_tok) return;
        Axis axis = Axis::x;
        if (axis_tok->text == "x") axis = Axis::x;
        else if (axis_tok->text == "y") axis = Axis::y;
        else if (axis_tok->text == "z") axis = Axis::z;
        else {
            error("E002", "unknown axis '" + axis_tok->text + "'", line.number,
                  axis_tok->col);
            return;
        }
        const Tok* angle_tok = tok_at(line, 3, "angle");
        if (!angle_tok) return;
        auto angle = parse_angle(*angle_tok, line.number);
        if (!angle) return;

        PulseStmt stmt;
        stmt.addressed = addressed;
        stmt.axis = axis;
        stmt.angle = *angle;
        stmt.span = {line.number, head_col(line)};

        std::size_t i = 4;
        if (i < line.toks.size() && line.toks[i].text[0] == '@') {
            auto targets = parse_targets(line.toks[i], line.number);
            if (!targets) return;
            stmt.targets = *targets;
            stmt.has_targets = true;
            ++i;
        }
        while (i < line.toks.size()) {
            const Tok& attr = line.toks[i];
            if (attr.text == "rabi") {
                const Tok* v = tok_at(line, i + 1, "frequency after 'rabi'");
                if (!v) return;
                auto f = parse_freq(*v, line.number);
                if (!f) return;
                stmt.rabi = *f;
                i += 2;
            } else if (attr.text == "dur") {
                const Tok* v = tok_at(line, i + 1, "time after 'dur'");
                if (!v) return;
                auto t = parse_time(*v, line.number);
                if (!t) return;
                stmt.dur = *t;
                i += 2;
            } else if (attr.text == "virtual") {
                stmt.virtual_flag = true;
                ++i;
            } else {
                error("E001", "unknown attribute '" + attr.text + "'", line.number,
                      attr.col);
                return;
            }
        }
        if (addressed && !stmt.has_targets) {
            error("E006", "addressed pulse requires targets", line.number,
                  head_col(line));
            return;
        }
        prog.statements.push_back(stmt);
    }

    void parse_ramp(const Line& line, SeqProgram& prog) {
        const Tok* dir = tok_at(line, 1, "'on' or 'off'");
        if (!dir) return;
        bool on = false;
        if (dir->text == "on") on = true;
        else if (dir->text != "off") {
            error("E001", "expected 'on' or 'off', found '" + dir->text + "'",
                  line.number, dir->col);
            return;
        }
        const Tok* tgt = tok_at(line, 2, "targets");
        if (!tgt) return;
        auto targets = parse_targets(*tgt, line.number);
        if (!targets) return;
        const Tok* kw = tok_at(line, 3, "'shift'");
        if (!kw) return;
        if (kw->text != "shift") {
            error("E001", "expected 'shift', found '" + kw->text + "'", line.number,
                  kw->col);
            return;
        }
        const Tok* f = tok_at(line, 4, "frequency after 'shift'");
        if (!f) return;
        auto shift = parse_freq(*f, line.number);
        if (!shift) return;

        RampStmt stmt;
        stmt.on = on;
        stmt.targets = *targets;
        stmt.shift = *shift;
        stmt.span = {line.number, head_col(line)};

        std::size_t i = 5;
        if (i < line.toks.size() && line.toks[i].text == "dur") {
            const Tok* v = tok_at(line, i + 1, "time after 'dur'");
            if (!v) return;
            auto t = parse_time(*v, line.number);
            if (!t) return;
            stmt.dur = *t;
            i += 2;
        }
        if (i < line.toks.size()) {
            error("E001", "unexpected trailing tokens", line.number, line.toks[i].col);
            return;
        }
        prog.statements.push_back(stmt);
    }

    void parse_wait(const Line& line, SeqProgram& prog) {
        const Tok* t = tok_at(line, 1, "time");
        if (!t) return;
        auto time = parse_time(*t, line.number);
        if (!time) return;
        if (line.toks.size() > 2) {
            error("E001", "unexpected trailing tokens", line.number, line.toks[2].col);
            return;
        }
        prog.statements.push_back(WaitStmt{*time, {line.number, head_col(line)}});
    }

    void parse_measure(const Line& line, SeqProgram& prog) {
        const Tok* kw = tok_at(line, 1, "'basis'");
        if (!kw) return;
        if (kw->text != "basis") {
            error("E001", "expected 'basis', found '" + kw->text + "'", line.number,
                  kw->col);
            return;
        }
        const Tok* a = tok_at(line, 2, "angle");
        if (!a) return;
        auto angle = parse_angle(*a, line.number);
        if (!angle) return;
        MeasureStmt stmt;
        stmt.angle = *angle;
        stmt.span = {line.number, head_col(line)};
        std::size_t i = 3;
        if (i < line.toks.size() && line.toks[i].text[0] == '@') {
            auto targets = parse_targets(line.toks[i], line.number);
            if (!targets) return;
            stmt.targets = *targets;
            stmt.has_targets = true;
            ++i;
        }
        if (i < line.toks.size()) {
            error("E001", "unexpected trailing tokens", line.number, line.toks[i].col);
            return;
        }
        prog.statements.push_back(stmt);
    }

    static int head_col(const Line& line) { return line.toks.front().col; }
};

bool is_pi_echo_pulse(const PulseStmt& p) {
    return !p.addressed && !p.virtual_flag && p.axis == Axis::x &&
           std::abs(std::abs(p.angle.value) - pi) < 1e-9;
}

std::string format_targets(const std::vector<int>& targets) {
    std::string out = "@[";
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (i > 0) {
            out += ',';
        }
        out += std::to_string(targets[i]);
    }
    out += ']';
    return out;
}

}  // namespace

std::string Diagnostic::render() const {
    std::ostringstream out;
    out << line << ':' << column << ": "
        << (severity == Severity::error ? "error" : "warning") << ' ' << code << ": "
        << message;
    return out.str();
}

ParseResult parse(const std::string& text) { return Parser(text).run(); }

std::vector<Diagnostic> lint(const SeqProgram& p) {
    std::vector<Diagnostic> diags;
    std::vector<std::pair<std::vector<int>, SrcSpan>> open;  // ramp windows
    const PulseStmt* pending_addressed = nullptr;
    int pi_count = 0;

    for (const auto& stmt : p.statements) {
        if (const auto* ramp = std::get_if<RampStmt>(&stmt)) {
            if (ramp->on) {
                open.emplace_back(ramp->targets, ramp->span);
            } else {
                auto it = std::find_if(open.begin(), open.end(), [&](const auto& w) {
                    return w.first == ramp->targets;
                });
                if (it == open.end()) {
                    diags.push_back({Severity::warning, "W003",
                                     "ramp off without matching ramp on",
                                     ramp->span.line, ramp->span.column});
                } else {
                    open.erase(it);
                }
            }
            continue;
        }
        const auto* pulse = std::get_if<PulseStmt>(&stmt);
        if (!pulse) {
            continue;
        }
        if (pulse->addressed) {
            for (int site : pulse->targets) {
                const bool covered =
                    std::any_of(open.begin(), open.end(), [&](const auto& w) {
                        return std::find(w.first.begin(), w.first.end(), site) !=
                               w.first.end();
                    });
                if (!covered) {
                    diags.push_back({Severity::warning, "W001",
                                     "addressed pulse outside an addressing ramp window",
                                     pulse->span.line, pulse->span.column});
                    break;
                }
            }
            if (!pending_addressed) {
                pending_addressed = pulse;
                pi_count = 0;
            } else {
                if (pi_count % 2 == 0) {
                    diags.push_back(
                        {Severity::warning, "W002",
                         "unpaired echo: addressed pulses must pair across an odd "
                         "number of global x pi-pulses",
                         pulse->span.line, pulse->span.column});
                }
                pending_addressed = nullptr;
            }
        } else if (is_pi_echo_pulse(*pulse) && pending_addressed) {
            ++pi_count;
        }
    }
    if (pending_addressed) {
        diags.push_back({Severity::warning, "W002",
                         "unpaired echo: addressed pulses must pair across an odd "
                         "number of global x pi-pulses",
                         pending_addressed->span.line, pending_addressed->span.column});
    }
    for (const auto& w : open) {
        diags.push_back({Severity::warning, "W003", "addressing ramp never closed",
                         w.second.line, w.second.column});
    }
    return diags;
}

Schedule lower(const SeqProgram& p) {
    Schedule s;
    s.site_count = p.site_count;
    for (const auto& stmt : p.statements) {
        if (const auto* pulse = std::get_if<PulseStmt>(&stmt)) {
            PulseEvent e;
            e.kind = pulse->addressed ? PulseKind::addressed_pulse
                                      : PulseKind::global_pulse;
            e.axis = pulse->axis;
            e.angle = pulse->angle.value;
            if (pulse->has_targets) {
                e.targets = std::set<int>(pulse->targets.begin(), pulse->targets.end());
            }
            e.rabi_hz = pulse->rabi ? pulse->rabi->value : 0.0;
            e.virtual_frame = pulse->virtual_flag;
            if (pulse->virtual_flag) {
                e.duration = 0.0;
            } else if (pulse->dur) {
                e.duration = pulse->dur->value;
            } else if (e.rabi_hz > 0.0) {
                e.duration = std::abs(e.angle) / (2.0 * pi * e.rabi_hz);
            } else {
                e.duration = 0.0;
            }
            s.events.push_back(e);
        } else if (const auto* ramp = std::get_if<RampStmt>(&stmt)) {
            PulseEvent e;
            e.kind = PulseKind::addressing_ramp;
            e.ramp_on = ramp->on;
            e.targets = std::set<int>(ramp->targets.begin(), ramp->targets.end());
            e.shift_hz = ramp->shift.value;
            e.duration = ramp->dur ? ramp->dur->value : 0.0;
            s.events.push_back(e);
        } else if (const auto* wait = std::get_if<WaitStmt>(&stmt)) {
            s.events.push_back(PulseEvent::wait_for(wait->time.value));
        } else if (const auto* measure = std::get_if<MeasureStmt>(&stmt)) {
            MeasureOp m;
            m.basis_angle = measure->angle.value;
            if (measure->has_targets) {
                m.targets =
                    std::set<int>(measure->targets.begin(), measure->targets.end());
            }
            m.after_event = s.events.size();
            s.measurements.push_back(m);
        }
        // comments carry no schedule content
    }
    return s;
}

std::string format(const SeqProgram& p) {
    std::ostringstream out;
    out << "sites " << p.site_count << '\n';
    for (const auto& stmt : p.statements) {
        if (const auto* pulse = std::get_if<PulseStmt>(&stmt)) {
            out << "pulse " << (pulse->addressed ? "addressed" : "global") << ' '
                << to_string(pulse->axis) << ' ' << pulse->angle.lexeme;
            if (pulse->has_targets) {
                out << ' ' << format_targets(pulse->targets);
            }
            if (pulse->rabi) {
                out << " rabi " << pulse->rabi->lexeme;
            }
            if (pulse->dur) {
                out << " dur " << pulse->dur->lexeme;
            }
            if (pulse->virtual_flag) {
                out << " virtual";
            }
            out << '\n';
        } else if (const auto* ramp = std::get_if<RampStmt>(&stmt)) {
            out << "ramp " << (ramp->on ? "on" : "off") << ' '
                << format_targets(ramp->targets) << " shift " << ramp->shift.lexeme;
            if (ramp->dur) {
                out << " dur " << ramp->dur->lexeme;
            }
            out << '\n';
        } else if (const auto* wait = std::get_if<WaitStmt>(&stmt)) {
            out << "wait " << wait->time.lexeme << '\n';
        } else if (const auto* measure = std::get_if<MeasureStmt>(&stmt)) {
            out << "measure basis " << measure->angle.lexeme;
            if (measure->has_targets) {
                out << ' ' << format_targets(measure->targets);
            }
            out << '\n';
        } else if (const auto* comment = std::get_if<CommentStmt>(&stmt)) {
            out << '#' << comment->text << '\n';
        }
    }
    return out.str();
}

SeqProgram program_from_schedule(const Schedule& s) {
    SeqProgram p;
    p.site_count = s.site_count;
    std::size_t measure_idx = 0;
    for (std::size_t i = 0; i <= s.events.size(); ++i) {
        while (measure_idx < s.measurements.size() &&
               s.measurements[measure_idx].after_event == i) {
            const auto& m = s.measurements[measure_idx++];
            MeasureStmt stmt;
            stmt.angle = NumberLit{m.basis_angle, format_double(m.basis_angle) + "rad"};
            if (!m.targets.empty()) {
                stmt.targets = std::vector<int>(m.targets.begin(), m.targets.end());
                stmt.has_targets = true;
            }
            p.statements.push_back(stmt);
        }
        if (i == s.events.size()) {
            break;
        }
        const PulseEvent& e = s.events[i];
        switch (e.kind) {
            case PulseKind::global_pulse:
            case PulseKind::addressed_pulse: {
                PulseStmt stmt;
                stmt.addressed = e.kind == PulseKind::addressed_pulse;
                stmt.axis = e.axis;
                stmt.angle = NumberLit{e.angle, format_double(e.angle) + "rad"};
                if (!e.targets.empty()) {
                    stmt.targets = std::vector<int>(e.targets.begin(), e.targets.end());
                    stmt.has_targets = true;
                }
                if (e.rabi_hz > 0.0) {
                    stmt.rabi = NumberLit{e.rabi_hz, format_double(e.rabi_hz) + "Hz"};
                }
                stmt.virtual_flag = e.virtual_frame;
                // Emit an explicit duration when it cannot be recovered
                // from the Rabi frequency.
                const double derived =
                    e.rabi_hz > 0.0 ? std::abs(e.angle) / (2.0 * pi * e.rabi_hz) : 0.0;
                if (!e.virtual_frame && e.duration > 0.0 &&
                    std::abs(e.duration - derived) > 1e-18) {
                    stmt.dur = NumberLit{e.duration, format_double(e.duration) + "s"};
                }
                p.statements.push_back(stmt);
                break;
            }
            case PulseKind::addressing_ramp: {
                RampStmt stmt;
                stmt.on = e.ramp_on;
                stmt.targets = std::vector<int>(e.targets.begin(), e.targets.end());
                stmt.shift = NumberLit{e.shift_hz, format_double(e.shift_hz) + "Hz"};
                if (e.duration > 0.0) {
                    stmt.dur = NumberLit{e.duration, format_double(e.duration) + "s"};
                }
                p.statements.push_back(stmt);
                break;
            }
            case PulseKind::wait: {
                WaitStmt stmt;
                stmt.time = NumberLit{e.duration, format_double(e.duration) + "s"};
                p.statements.push_back(stmt);
                break;
            }
        }
    }
    return p;
}

}  // namespace eprsim::seqlang
