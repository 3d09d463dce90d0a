use std::collections::VecDeque;

use super::command::{Command, COMMAND_WORDS};
use super::DeviceError;

pub const FIFO_DEPTH: usize = 32;

/// In-order command queue fed one 32-bit word at a time.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CommandFifo {
    queue: VecDeque<Command>,
    partial: Vec<u32>,
}

impl CommandFifo {
    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty() && self.partial.is_empty()
    }

    pub fn partial_words(&self) -> &[u32] {
        &self.partial
    }

    pub fn commands(&self) -> impl Iterator<Item = &Command> {
        self.queue.iter()
    }

    /// Accepts one word. Returns the command once its last word arrives.
    /// A full queue rejects the first word of a new command; a bad
    /// encoding discards the partial command.
    pub fn push_word(&mut self, word: u32) -> Result<Option<Command>, DeviceError> {
        if self.partial.is_empty() && self.queue.len() >= FIFO_DEPTH {
            return Err(DeviceError::FifoFull);
        }
        self.partial.push(word);
        if self.partial.len() < COMMAND_WORDS {
            return Ok(None);
        }
        let words = std::mem::take(&mut self.partial);
        let cmd = Command::decode(&words)?;
        self.queue.push_back(cmd);
        Ok(Some(cmd))
    }

    pub fn push(&mut self, cmd: &Command) -> Result<(), DeviceError> {
        if !self.partial.is_empty() {
            return Err(DeviceError::malformed(
                "a partially written command is pending",
            ));
        }
        for w in cmd.encode() {
            self.push_word(w)?;
        }
        Ok(())
    }

    pub fn front(&self) -> Option<&Command> {
        self.queue.front()
    }

    pub(crate) fn pop(&mut self) -> Option<Command> {
        self.queue.pop_front()
    }

    pub(crate) fn restore(queue: Vec<Command>, partial: Vec<u32>) -> Self {
        CommandFifo {
            queue: queue.into(),
            partial,
        }
    }
}
