use std::fmt::Display;

/// Exit-code-bearing error: bad input (1) or something broke on our side (2).
#[derive(Debug)]
pub enum Failure {
    Input(anyhow::Error),
    Internal(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Internal(_) => 2,
        }
    }

    pub fn input(msg: impl Display) -> Self {
        Failure::Input(anyhow::anyhow!("{msg}"))
    }
}

impl Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Input(e) | Failure::Internal(e) => write!(f, "{e:#}"),
        }
    }
}

pub type Outcome<T = ()> = Result<T, Failure>;

pub trait Classify<T> {
    fn input(self, what: impl Display) -> Outcome<T>;
    fn internal(self, what: impl Display) -> Outcome<T>;
}

impl<T, E> Classify<T> for Result<T, E>
where
    E: Into<anyhow::Error>,
{
    fn input(self, what: impl Display) -> Outcome<T> {
        self.map_err(|e| Failure::Input(e.into().context(what.to_string())))
    }

    fn internal(self, what: impl Display) -> Outcome<T> {
        self.map_err(|e| Failure::Internal(e.into().context(what.to_string())))
    }
}
