//! Line-oriented expert shell over a loaded knowledge base.

use std::io::{self, BufRead, Write};
use std::path::Path;
use std::sync::Arc;

use ruleforge::inference::{Answer, ConsultationSession, Status, EXIT_CODE};
use ruleforge::knowledge_base::{parse_knb, KnowledgeBase};

pub const PROMPT: &str = "expert-shell> ";
pub const HELP_LINE: &str = "Type help. load. solve. why. quit. or 99.";
const FILE_PROMPT: &str = "Enter file name in single quotes (ex. '1.knb'.): ";
const CHOICE_PROMPT: &str = "Enter the choice> ";

/// Renders `[1=yes, 2=no, 99=exitShell]`.
pub fn menu_line(menu: &[String]) -> String {
    let mut entries: Vec<String> = menu.iter().enumerate().map(|(i, v)| format!("{}={v}", i + 1)).collect();
    entries.push(format!("{EXIT_CODE}=exitShell"));
    format!("[{}]", entries.join(", "))
}

/// Strips surrounding whitespace, one trailing `.` and single quotes.
fn clean(line: &str) -> &str {
    let line = line.trim();
    let line = line.strip_suffix('.').unwrap_or(line).trim();
    line.strip_prefix('\'').and_then(|l| l.strip_suffix('\'')).unwrap_or(line)
}

pub struct Shell<'a, R, W> {
    input: R,
    out: &'a mut W,
    kb: Option<Arc<KnowledgeBase>>,
    session: Option<ConsultationSession>,
}

impl<'a, R: BufRead, W: Write> Shell<'a, R, W> {
    pub fn new(input: R, out: &'a mut W) -> Self {
        Self { input, out, kb: None, session: None }
    }

    /// Reads and parses a `.knb` file, replacing any loaded knowledge base.
    pub fn load(&mut self, path: &Path) -> Result<(), String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let kb = parse_knb(&text).map_err(|e| crate::located(path, &e))?;
        self.kb = Some(Arc::new(kb));
        self.session = None;
        Ok(())
    }

    fn read_line(&mut self) -> io::Result<Option<String>> {
        self.out.flush()?;
        let mut line = String::new();
        Ok(match self.input.read_line(&mut line)? {
            0 => None,
            _ => Some(line),
        })
    }

    /// Runs until `quit`, `99` or end of input.
    pub fn run(&mut self) -> io::Result<()> {
        writeln!(self.out, "This is the Easy Expert System shell.")?;
        writeln!(self.out, "{HELP_LINE}")?;
        writeln!(self.out, "at the prompt.")?;
        loop {
            write!(self.out, "{PROMPT}")?;
            let Some(line) = self.read_line()? else {
                writeln!(self.out)?;
                return Ok(());
            };
            let command = clean(&line);
            let (word, rest) = command.split_once(char::is_whitespace).unwrap_or((command, ""));
            match word {
                "" => {}
                "help" => self.help()?,
                "load" => self.load_command(clean(rest))?,
                "solve" => self.solve()?,
                "why" => self.why()?,
                "quit" => return Ok(()),
                w if w == EXIT_CODE.to_string() => return Ok(()),
                _ => writeln!(self.out, "{HELP_LINE}")?,
            }
        }
    }

    fn help(&mut self) -> io::Result<()> {
        writeln!(self.out, "load.  read a knowledge base (.knb) file")?;
        writeln!(self.out, "solve. start a consultation")?;
        writeln!(self.out, "why.   explain the last conclusion")?;
        writeln!(self.out, "quit.  leave the shell (same as 99.)")
    }

    fn load_command(&mut self, inline: &str) -> io::Result<()> {
        let name = if inline.is_empty() {
            write!(self.out, "{FILE_PROMPT}")?;
            match self.read_line()? {
                Some(line) => clean(&line).to_string(),
                None => return Ok(()),
            }
        } else {
            inline.to_string()
        };
        match self.load(Path::new(&name)) {
            Ok(()) => writeln!(self.out, "% {name} compiled"),
            Err(e) => writeln!(self.out, "Cannot load {e}"),
        }
    }

    fn solve(&mut self) -> io::Result<()> {
        let Some(kb) = self.kb.clone() else {
            return writeln!(self.out, "No knowledge base loaded. Type load.");
        };
        let mut session = match ConsultationSession::start(kb) {
            Ok(s) => s,
            Err(e) => return writeln!(self.out, "Cannot start: {e}"),
        };
        while let Status::AwaitingAnswer { attribute, menu } = session.status().clone() {
            writeln!(self.out)?;
            writeln!(self.out, "What is the value for {attribute}?")?;
            let answer = loop {
                writeln!(self.out, "{}", menu_line(&menu))?;
                write!(self.out, "{CHOICE_PROMPT}")?;
                let Some(line) = self.read_line()? else {
                    writeln!(self.out)?;
                    break Answer::Exit;
                };
                let reply = clean(&line);
                let parsed = match reply.parse::<u32>() {
                    Ok(n) => Answer::from_choice(n, &menu),
                    Err(_) => menu.iter().any(|v| v == reply).then(|| Answer::Value(reply.to_string())),
                };
                match parsed {
                    Some(a) => break a,
                    None => writeln!(self.out, "Please enter one of the numbers listed.")?,
                }
            };
            session.submit_answer(&attribute, answer).expect("answer is drawn from the current menu");
        }
        match session.status() {
            Status::Concluded(c) => writeln!(self.out, "{c}")?,
            Status::Failed => writeln!(self.out, "No rule could be satisfied.")?,
            Status::Aborted => writeln!(self.out, "Consultation aborted.")?,
            Status::AwaitingAnswer { .. } => unreachable!("loop exits only on a final status"),
        }
        self.session = Some(session);
        Ok(())
    }

    fn why(&mut self) -> io::Result<()> {
        match self.session.as_ref().map(ConsultationSession::explain) {
            Some(Ok(explanation)) => {
                writeln!(self.out)?;
                writeln!(self.out, "{explanation}")
            }
            _ => writeln!(self.out, "Nothing to explain. Type solve."),
        }
    }
}
