pub mod codespace;
pub mod channel;
pub mod framing;
pub mod stack;
pub mod feedback;
pub mod harness;
