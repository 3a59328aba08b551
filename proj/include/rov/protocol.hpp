#pragma once

// Tether wire format.
//
//   AA 55 | len:u8 | msg_type:u8 | payload[len] | crc:u16le
//
// crc is CRC-16/CCITT-FALSE (poly 0x1021, init 0xFFFF, no reflection, no
// xorout) over msg_type, len, payload in that order. Payload integers are
// little-endian; physical values travel as fixed-point integers rounded to
// nearest with ties away from zero.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rov/control.hpp"

namespace rov::proto {

inline constexpr std::uint8_t kSync0 = 0xAA;
inline constexpr std::uint8_t kSync1 = 0x55;
inline constexpr std::size_t kMaxPayload = 64;
inline constexpr std::size_t kHeaderSize = 4;  // sync0 sync1 len type
inline constexpr std::size_t kOverhead = kHeaderSize + 2;

enum class MsgType : std::uint8_t { telemetry = 0x01, command = 0x02, log = 0x03 };

// Fixed-point quanta, in SI units per count.
inline constexpr double kAngleQuantum = 0.01;     // centiradians
inline constexpr double kDepthQuantum = 0.001;    // millimetres
inline constexpr double kTurbidityQuantum = 0.1;  // NTU x10
inline constexpr double kDutyQuantum = 0.001;     // per-mille
inline constexpr double kGainQuantum = 0.001;     // x1000
inline constexpr double kTimeQuantum = 0.001;     // milliseconds

inline constexpr std::uint8_t kFlagSensorFault = 0x01;
inline constexpr std::uint8_t kFlagSaturated = 0x02;

struct GainPair {
    double kp = 0.0;
    double ki = 0.0;
    bool operator==(const GainPair&) const = default;
};

struct TelemetryFrame {
    std::uint32_t seq = 0;
    double t = 0.0;          // s since run start
    double yaw_est = 0.0;    // rad
    double depth_est = 0.0;  // m
    double turbidity = 0.0;  // NTU, clamped to the u16 range on the wire
    ThrusterDuties duties;
    ControlMode mode = ControlMode::manual;
    GainPair yaw_gains;
    GainPair depth_gains;
    std::uint8_t flags = 0;

    bool operator==(const TelemetryFrame&) const = default;
};

struct SetMode {
    ControlMode mode = ControlMode::manual;
    bool operator==(const SetMode&) const = default;
};
struct SetSetpoints {
    double yaw_ref = 0.0;
    double depth_ref = 0.0;
    double surge_duty = 0.0;
    bool operator==(const SetSetpoints&) const = default;
};
/// Any subset of the tunables; absent members are left unchanged.
struct SetGains {
    std::optional<GainPair> yaw;
    std::optional<GainPair> depth;
    std::optional<double> alpha;
    bool operator==(const SetGains&) const = default;
};
/// Also switches the vehicle to manual mode.
struct ManualDuties {
    ThrusterDuties duties;
    bool operator==(const ManualDuties&) const = default;
};
struct Ping {
    bool operator==(const Ping&) const = default;
};

/// Variant index doubles as the wire kind byte.
using CommandPayload = std::variant<SetMode, SetSetpoints, SetGains, ManualDuties, Ping>;

enum class CommandKind : std::uint8_t {
    set_mode = 0,
    set_setpoints = 1,
    set_gains = 2,
    manual_duties = 3,
    ping = 4,
};

struct CommandMessage {
    std::uint32_t seq = 0;
    CommandPayload payload = Ping{};

    CommandKind kind() const { return static_cast<CommandKind>(payload.index()); }
    bool operator==(const CommandMessage&) const = default;
};

struct LogText {
    std::string text;
    bool operator==(const LogText&) const = default;
};

using Message = std::variant<TelemetryFrame, CommandMessage, LogText>;

std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> data, std::uint16_t crc = 0xFFFF);

/// Throws EncodingError naming the offending field when a value does not fit
/// its fixed-point slot, or the payload would exceed kMaxPayload.
std::vector<std::uint8_t> encode_frame(const Message& msg);

struct DecodeError {
    enum class Kind { crc_mismatch, unknown_msg_type, bad_length, malformed_payload, skipped_bytes };
    Kind kind;
    std::size_t offset;  // byte offset of the frame (or skipped run) in the input
    std::string detail;
};

struct DecodeResult {
    std::vector<Message> messages;
    std::vector<std::uint8_t> remainder;
    std::vector<DecodeError> errors;
};

/// Scans `buffer` for frames. Bytes before a sync pattern are skipped and
/// reported; frames failing CRC are reported and the scan resumes one byte
/// after their sync; a trailing partial frame is returned as remainder.
DecodeResult decode_stream(std::span<const std::uint8_t> buffer);

/// Incremental wrapper for byte streams: feed arbitrary chunks, get messages.
class StreamDecoder {
public:
    DecodeResult feed(std::span<const std::uint8_t> chunk);
    std::size_t pending() const { return buf_.size(); }

private:
    std::vector<std::uint8_t> buf_;
};

const char* to_string(CommandKind kind);
const char* to_string(DecodeError::Kind kind);
const char* to_string(ControlMode mode);

}  // namespace rov::proto
