//! Live session gateway: JSON-lines protocol over WebSocket or plain TCP,
//! one recognizer + command FSM + simulated swarm per session.

pub mod protocol;
mod server;
mod session;

pub use protocol::{ClientMessage, CommandRequest, DroneView, ScheduleProgress, ServerMessage, StateSnapshot};
pub use server::{router, run, serve_tcp, serve_ws, Hub, HubConfig, ServerConfig, SessionHandle, BROADCAST_HZ, SIM_HZ};
pub use session::{Session, SessionConfig};
