#include "rov/protocol.hpp"

#include <cmath>
#include <limits>

namespace rov::proto {
namespace {

class Writer {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v) {
        out_.push_back(static_cast<std::uint8_t>(v & 0xFF));
        out_.push_back(static_cast<std::uint8_t>(v >> 8));
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void i16(std::int16_t v) { u16(static_cast<std::uint16_t>(v)); }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void bytes(const std::string& s) { out_.insert(out_.end(), s.begin(), s.end()); }

    std::vector<std::uint8_t>& data() { return out_; }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

    bool ok() const { return ok_; }
    bool done() const { return pos_ == in_.size(); }

    std::uint8_t u8() {
        if (!need(1)) return 0;
        return in_[pos_++];
    }
    std::uint16_t u16() {
        if (!need(2)) return 0;
        const auto v = static_cast<std::uint16_t>(in_[pos_] | (in_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }
    std::uint32_t u32() {
        if (!need(4)) return 0;
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::int16_t i16() { return static_cast<std::int16_t>(u16()); }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }

private:
    bool need(std::size_t n) {
        if (pos_ + n > in_.size()) ok_ = false;
        return ok_;
    }

    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
    bool ok_ = true;
};

template <typename Int>
Int quantize(double value, double quantum, const char* field) {
    if (!std::isfinite(value)) throw EncodingError(field, "value is not finite");
    const double counts = std::round(value / quantum);
    if (counts < static_cast<double>(std::numeric_limits<Int>::min()) ||
        counts > static_cast<double>(std::numeric_limits<Int>::max()))
        throw EncodingError(field, "value out of encodable range");
    return static_cast<Int>(counts);
}

std::int16_t quantize_duty(double duty, const char* field) {
    if (!(duty >= -1.0 && duty <= 1.0)) throw EncodingError(field, "duty outside [-1, 1]");
    return quantize<std::int16_t>(duty, kDutyQuantum, field);
}

std::uint8_t encode_mode(ControlMode mode) {
    if (mode != ControlMode::manual && mode != ControlMode::closed_loop)
        throw EncodingError("mode", "unknown control mode");
    return static_cast<std::uint8_t>(mode);
}

std::optional<ControlMode> decode_mode(std::uint8_t b) {
    if (b == 0) return ControlMode::manual;
    if (b == 1) return ControlMode::closed_loop;
    return std::nullopt;
}

void write_telemetry(Writer& w, const TelemetryFrame& f) {
    w.u32(f.seq);
    if (!(f.t >= 0.0)) throw EncodingError("t", "time must be >= 0");
    w.u32(quantize<std::uint32_t>(f.t, kTimeQuantum, "t"));
    w.i32(quantize<std::int32_t>(f.yaw_est, kAngleQuantum, "yaw_est"));
    w.i32(quantize<std::int32_t>(f.depth_est, kDepthQuantum, "depth_est"));
    if (!std::isfinite(f.turbidity)) throw EncodingError("turbidity", "value is not finite");
    const double ntu = clamp(f.turbidity, 0.0, 65535.0 * kTurbidityQuantum);
    w.u16(quantize<std::uint16_t>(ntu, kTurbidityQuantum, "turbidity"));
    w.i16(quantize_duty(f.duties.left, "duties.left"));
    w.i16(quantize_duty(f.duties.right, "duties.right"));
    w.i16(quantize_duty(f.duties.vertical, "duties.vertical"));
    w.u8(encode_mode(f.mode));
    w.i32(quantize<std::int32_t>(f.yaw_gains.kp, kGainQuantum, "yaw_gains.kp"));
    w.i32(quantize<std::int32_t>(f.yaw_gains.ki, kGainQuantum, "yaw_gains.ki"));
    w.i32(quantize<std::int32_t>(f.depth_gains.kp, kGainQuantum, "depth_gains.kp"));
    w.i32(quantize<std::int32_t>(f.depth_gains.ki, kGainQuantum, "depth_gains.ki"));
    w.u8(f.flags);
}

std::optional<TelemetryFrame> read_telemetry(Reader& r) {
    TelemetryFrame f;
    f.seq = r.u32();
    f.t = r.u32() * kTimeQuantum;
    f.yaw_est = r.i32() * kAngleQuantum;
    f.depth_est = r.i32() * kDepthQuantum;
    f.turbidity = r.u16() * kTurbidityQuantum;
    f.duties.left = r.i16() * kDutyQuantum;
    f.duties.right = r.i16() * kDutyQuantum;
    f.duties.vertical = r.i16() * kDutyQuantum;
    const auto mode = decode_mode(r.u8());
    f.yaw_gains.kp = r.i32() * kGainQuantum;
    f.yaw_gains.ki = r.i32() * kGainQuantum;
    f.depth_gains.kp = r.i32() * kGainQuantum;
    f.depth_gains.ki = r.i32() * kGainQuantum;
    f.flags = r.u8();
    if (!r.ok() || !r.done() || !mode) return std::nullopt;
    f.mode = *mode;
    return f;
}

constexpr std::uint8_t kGainMaskYaw = 0x01;
constexpr std::uint8_t kGainMaskDepth = 0x02;
constexpr std::uint8_t kGainMaskAlpha = 0x04;

struct CommandWriter {
    Writer& w;

    void operator()(const SetMode& m) const { w.u8(encode_mode(m.mode)); }
    void operator()(const SetSetpoints& s) const {
        w.i32(quantize<std::int32_t>(s.yaw_ref, kAngleQuantum, "yaw_ref"));
        w.i32(quantize<std::int32_t>(s.depth_ref, kDepthQuantum, "depth_ref"));
        w.i16(quantize_duty(s.surge_duty, "surge_duty"));
    }
    void operator()(const SetGains& g) const {
        std::uint8_t mask = 0;
        if (g.yaw) mask |= kGainMaskYaw;
        if (g.depth) mask |= kGainMaskDepth;
        if (g.alpha) mask |= kGainMaskAlpha;
        w.u8(mask);
        const GainPair yaw = g.yaw.value_or(GainPair{});
        const GainPair depth = g.depth.value_or(GainPair{});
        w.i32(quantize<std::int32_t>(yaw.kp, kGainQuantum, "yaw_gains.kp"));
        w.i32(quantize<std::int32_t>(yaw.ki, kGainQuantum, "yaw_gains.ki"));
        w.i32(quantize<std::int32_t>(depth.kp, kGainQuantum, "depth_gains.kp"));
        w.i32(quantize<std::int32_t>(depth.ki, kGainQuantum, "depth_gains.ki"));
        w.i32(quantize<std::int32_t>(g.alpha.value_or(0.0), kGainQuantum, "alpha"));
    }
    void operator()(const ManualDuties& m) const {
        w.i16(quantize_duty(m.duties.left, "duties.left"));
        w.i16(quantize_duty(m.duties.right, "duties.right"));
        w.i16(quantize_duty(m.duties.vertical, "duties.vertical"));
    }
    void operator()(const Ping&) const {}
};

std::optional<CommandMessage> read_command(Reader& r, std::string& why) {
    CommandMessage c;
    c.seq = r.u32();
    const std::uint8_t kind = r.u8();
    switch (kind) {
        case static_cast<std::uint8_t>(CommandKind::set_mode): {
            const auto mode = decode_mode(r.u8());
            if (!mode) {
                why = "unknown mode byte";
                return std::nullopt;
            }
            c.payload = SetMode{*mode};
            break;
        }
        case static_cast<std::uint8_t>(CommandKind::set_setpoints): {
            SetSetpoints s;
            s.yaw_ref = r.i32() * kAngleQuantum;
            s.depth_ref = r.i32() * kDepthQuantum;
            s.surge_duty = r.i16() * kDutyQuantum;
            c.payload = s;
            break;
        }
        case static_cast<std::uint8_t>(CommandKind::set_gains): {
            const std::uint8_t mask = r.u8();
            GainPair yaw{r.i32() * kGainQuantum, r.i32() * kGainQuantum};
            GainPair depth{r.i32() * kGainQuantum, r.i32() * kGainQuantum};
            const double alpha = r.i32() * kGainQuantum;
            if (mask & ~(kGainMaskYaw | kGainMaskDepth | kGainMaskAlpha)) {
                why = "unknown set_gains mask bits";
                return std::nullopt;
            }
            SetGains g;
            if (mask & kGainMaskYaw) g.yaw = yaw;
            if (mask & kGainMaskDepth) g.depth = depth;
            if (mask & kGainMaskAlpha) g.alpha = alpha;
            c.payload = g;
            break;
        }
        case static_cast<std::uint8_t>(CommandKind::manual_duties): {
            ManualDuties m;
            m.duties.left = r.i16() * kDutyQuantum;
            m.duties.right = r.i16() * kDutyQuantum;
            m.duties.vertical = r.i16() * kDutyQuantum;
            c.payload = m;
            break;
        }
        case static_cast<std::uint8_t>(CommandKind::ping):
            c.payload = Ping{};
            break;
        default:
            why = "unknown command kind " + std::to_string(kind);
            return std::nullopt;
    }
    if (!r.ok() || !r.done()) {
        why = "payload length does not match command kind";
        return std::nullopt;
    }
    return c;
}

}  // namespace

std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> data, std::uint16_t crc) {
    for (std::uint8_t byte : data) {
        crc ^= static_cast<std::uint16_t>(byte) << 8;
        for (int bit = 0; bit < 8; ++bit)
            crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021)
                                 : static_cast<std::uint16_t>(crc << 1);
    }
    return crc;
}

namespace {

std::uint16_t frame_crc(std::uint8_t type, std::uint8_t len, std::span<const std::uint8_t> payload) {
    const std::uint8_t head[2] = {type, len};
    return crc16_ccitt_false(payload, crc16_ccitt_false(head));
}

}  // namespace

std::vector<std::uint8_t> encode_frame(const Message& msg) {
    Writer payload;
    MsgType type{};
    if (const auto* tf = std::get_if<TelemetryFrame>(&msg)) {
        type = MsgType::telemetry;
        write_telemetry(payload, *tf);
    } else if (const auto* cmd = std::get_if<CommandMessage>(&msg)) {
        type = MsgType::command;
        payload.u32(cmd->seq);
        payload.u8(static_cast<std::uint8_t>(cmd->kind()));
        std::visit(CommandWriter{payload}, cmd->payload);
    } else {
        type = MsgType::log;
        payload.bytes(std::get<LogText>(msg).text);
    }

    const auto& body = payload.data();
    if (body.size() > kMaxPayload) throw EncodingError("payload", "exceeds 64 bytes");

    const auto len = static_cast<std::uint8_t>(body.size());
    const auto type_byte = static_cast<std::uint8_t>(type);
    std::vector<std::uint8_t> out;
    out.reserve(body.size() + kOverhead);
    out.push_back(kSync0);
    out.push_back(kSync1);
    out.push_back(len);
    out.push_back(type_byte);
    out.insert(out.end(), body.begin(), body.end());
    const std::uint16_t crc = frame_crc(type_byte, len, body);
    out.push_back(static_cast<std::uint8_t>(crc & 0xFF));
    out.push_back(static_cast<std::uint8_t>(crc >> 8));
    return out;
}

DecodeResult decode_stream(std::span<const std::uint8_t> buf) {
    DecodeResult res;
    std::size_t pos = 0;
    std::size_t skip_start = 0;
    bool skipping = false;

    auto flush_skip = [&](std::size_t end) {
        if (skipping && end > skip_start)
            res.errors.push_back({DecodeError::Kind::skipped_bytes, skip_start,
                                  std::to_string(end - skip_start) + " bytes without sync"});
        skipping = false;
    };
    auto skip_byte = [&](std::size_t at) {
        if (!skipping) {
            skipping = true;
            skip_start = at;
        }
    };

    while (pos < buf.size()) {
        if (buf[pos] != kSync0) {
            skip_byte(pos);
            ++pos;
            continue;
        }
        if (pos + 1 >= buf.size()) break;  // lone 0xAA at the tail: might be a sync
        if (buf[pos + 1] != kSync1) {
            skip_byte(pos);
            ++pos;
            continue;
        }
        if (pos + kHeaderSize > buf.size()) break;

        flush_skip(pos);
        const std::uint8_t len = buf[pos + 2];
        const std::uint8_t type = buf[pos + 3];
        if (len > kMaxPayload) {
            res.errors.push_back({DecodeError::Kind::bad_length, pos,
                                  "length " + std::to_string(len) + " exceeds 64"});
            ++pos;
            continue;
        }
        const std::size_t total = kOverhead + len;
        if (pos + total > buf.size()) break;

        const auto payload = buf.subspan(pos + kHeaderSize, len);
        const std::uint16_t wire_crc = static_cast<std::uint16_t>(
            buf[pos + kHeaderSize + len] | (buf[pos + kHeaderSize + len + 1] << 8));
        if (frame_crc(type, len, payload) != wire_crc) {
            res.errors.push_back({DecodeError::Kind::crc_mismatch, pos, "CRC mismatch"});
            ++pos;
            continue;
        }

        Reader reader(payload);
        switch (type) {
            case static_cast<std::uint8_t>(MsgType::telemetry):
                if (auto tf = read_telemetry(reader))
                    res.messages.emplace_back(std::move(*tf));
                else
                    res.errors.push_back(
                        {DecodeError::Kind::malformed_payload, pos, "bad telemetry payload"});
                break;
            case static_cast<std::uint8_t>(MsgType::command): {
                std::string why;
                if (auto cmd = read_command(reader, why))
                    res.messages.emplace_back(std::move(*cmd));
                else
                    res.errors.push_back({DecodeError::Kind::malformed_payload, pos, why});
                break;
            }
            case static_cast<std::uint8_t>(MsgType::log):
                res.messages.emplace_back(LogText{std::string(payload.begin(), payload.end())});
                break;
            default:
                res.errors.push_back({DecodeError::Kind::unknown_msg_type, pos,
                                      "msg_type " + std::to_string(type)});
                break;
        }
        pos += total;
    }

    flush_skip(pos);
    res.remainder.assign(buf.begin() + static_cast<std::ptrdiff_t>(pos), buf.end());
    return res;
}

DecodeResult StreamDecoder::feed(std::span<const std::uint8_t> chunk) {
    buf_.insert(buf_.end(), chunk.begin(), chunk.end());
    DecodeResult res = decode_stream(buf_);
    buf_ = res.remainder;
    return res;
}

const char* to_string(CommandKind kind) {
    switch (kind) {
        case CommandKind::set_mode: return "set_mode";
        case CommandKind::set_setpoints: return "set_setpoints";
        case CommandKind::set_gains: return "set_gains";
        case CommandKind::manual_duties: return "manual_duties";
        case CommandKind::ping: return "ping";
    }
    return "unknown";
}

const char* to_string(DecodeError::Kind kind) {
    switch (kind) {
        case DecodeError::Kind::crc_mismatch: return "crc_mismatch";
        case DecodeError::Kind::unknown_msg_type: return "unknown_msg_type";
        case DecodeError::Kind::bad_length: return "bad_length";
        case DecodeError::Kind::malformed_payload: return "malformed_payload";
        case DecodeError::Kind::skipped_bytes: return "skipped_bytes";
    }
    return "unknown";
}

const char* to_string(ControlMode mode) {
    return mode == ControlMode::closed_loop ? "closed_loop" : "manual";
}

}  // namespace rov::proto
