//! Generated fixtures: a planted mini-repository whose GUI trace singles out
//! the buggy file, small benchmark manifests over it, and a seeded large
//! corpus for throughput checks.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::trace::{Action, ExecutionTrace, InteractionStep};

pub const PLANTED_TRUTH: &str = "app/src/main/java/org/notes/ui/EditNoteActivity.java";

/// Shares no term with the buggy file, so the text-only ranking puts that
/// file last.
pub const PLANTED_REPORT: &str = "App crashes with a database exception after the sync backup export runs";

const PLANTED_FILES: &[(&str, &str)] = &[
    (
        PLANTED_TRUTH,
        r#"package org.notes.ui;

import android.os.Bundle;
import android.widget.Button;
import android.widget.EditText;

public class EditNoteActivity extends BaseScreen {
    private EditText titleField;
    private EditText bodyField;
    private Button saveButton;

    @Override
    protected void onCreate(Bundle state) {
        super.onCreate(state);
        setContentView(R.layout.edit_note);
        titleField = findViewById(R.id.note_title);
        bodyField = findViewById(R.id.note_body);
        saveButton = findViewById(R.id.save_button);
        saveButton.setOnClickListener(v -> saveNote());
    }

    private void saveNote() {
        String title = titleField.getText().toString();
        String body = bodyField.getText().toString();
        NoteDraft draft = new NoteDraft(title, body);
        draft.store(getContentResolver());
        finish();
    }
}
"#,
    ),
    (
        "app/src/main/java/org/notes/ui/MainActivity.java",
        r#"package org.notes.ui;

import org.notes.sync.SyncManager;

public class MainActivity extends BaseScreen {
    private SyncManager syncManager;

    @Override
    protected void onStart() {
        super.onStart();
        syncManager.runSync();
    }
}
"#,
    ),
    (
        "app/src/main/java/org/notes/data/NoteDatabase.java",
        r#"package org.notes.data;

public class NoteDatabase {
    private static NoteDatabase instance;

    public static synchronized NoteDatabase open(Context context) throws DatabaseException {
        if (instance == null) {
            instance = new NoteDatabase();
        }
        return instance;
    }

    public void close() throws DatabaseException {
        instance = null;
    }
}
"#,
    ),
    (
        "app/src/main/java/org/notes/data/NoteDao.java",
        r#"package org.notes.data;

import java.util.List;

public interface NoteDao {
    List<Note> queryDatabase(String where) throws DatabaseException;

    void insert(Note note) throws DatabaseException;
}
"#,
    ),
    (
        "app/src/main/java/org/notes/sync/SyncService.java",
        r#"package org.notes.sync;

public class SyncService implements Runnable {
    private final SyncQueue queue = new SyncQueue();

    @Override
    public void run() {
        while (!queue.isEmpty()) {
            try {
                queue.poll().sync();
            } catch (SyncException exception) {
                queue.retryLater(exception);
            }
        }
    }
}
"#,
    ),
    (
        "app/src/main/java/org/notes/sync/BackupExporter.java",
        r#"package org.notes.sync;

import java.io.File;

public class BackupExporter {
    public File exportBackup(File target) throws ExportException {
        BackupWriter writer = new BackupWriter(target);
        writer.writeAll();
        return target;
    }
}
"#,
    ),
    (
        "app/src/main/java/org/notes/util/CrashReporter.java",
        r#"package org.notes.util;

public final class CrashReporter implements Thread.UncaughtExceptionHandler {
    @Override
    public void uncaughtException(Thread thread, Throwable exception) {
        CrashLog.append(thread.getName(), exception);
    }
}
"#,
    ),
    (
        "app/src/main/java/org/notes/util/FileUtils.java",
        r#"package org.notes.util;

import java.io.File;
import java.io.IOException;

public final class FileUtils {
    public static void exportTo(File source, File target) throws IOException {
        Streams.copy(source, target);
    }
}
"#,
    ),
    (
        "app/src/main/java/org/notes/net/ApiClient.java",
        r#"package org.notes.net;

public class ApiClient {
    private final HttpTransport transport;

    public ApiClient(HttpTransport transport) {
        this.transport = transport;
    }

    public SyncResponse sync(SyncRequest request) throws NetworkException {
        return transport.post("/sync", request);
    }
}
"#,
    ),
    (
        "app/src/main/java/org/notes/settings/SettingsFragment.java",
        r#"package org.notes.settings;

public class SettingsFragment extends PreferenceFragment {
    @Override
    public void onCreatePreferences(Bundle state, String rootKey) {
        setPreferencesFromResource(R.xml.preferences, rootKey);
        findPreference("backup_enabled").setOnPreferenceChangeListener(new BackupToggle());
    }
}
"#,
    ),
    (
        "app/src/main/java/org/notes/model/Note.java",
        r##"package org.notes.model;

public class Note implements Exportable {
    private String title;
    private String body;

    @Override
    public String exportAsMarkdown() {
        return "# " + title + "\n" + body;
    }
}
"##,
    ),
    (
        "app/src/main/java/org/notes/NotesApp.java",
        r#"package org.notes;

import org.notes.util.CrashReporter;

public class NotesApp extends Application {
    @Override
    public void onCreate() {
        super.onCreate();
        Thread.setDefaultUncaughtExceptionHandler(new CrashReporter());
    }
}
"#,
    ),
];

/// Writes the 12-file planted repository under `root`.
pub fn write_planted_repo(root: &Path) -> io::Result<()> {
    for (path, text) in PLANTED_FILES {
        let target = root.join(path);
        fs::create_dir_all(target.parent().expect("file has a parent"))?;
        fs::write(target, text)?;
    }
    Ok(())
}

pub fn planted_file_count() -> usize {
    PLANTED_FILES.len()
}

/// Three steps on the buggy screen: fill in the title and body, tap save.
pub fn planted_trace() -> ExecutionTrace {
    let step = |action, resource: &str, widget: &str, text: Option<&str>, ts| InteractionStep {
        screen: "EditNoteActivity".into(),
        action,
        resource_id: Some(format!("org.notes:id/{resource}")),
        widget_class: Some(widget.into()),
        widget_text: text.map(str::to_string),
        timestamp_ms: Some(ts),
    };
    ExecutionTrace {
        app_package: Some("org.notes".into()),
        device_info: Some("emulator API 30".into()),
        steps: vec![
            step(Action::Tap, "note_title", "android.widget.EditText", None, 1_000),
            step(Action::TypeText, "note_body", "android.widget.EditText", Some("groceries"), 2_500),
            step(Action::Tap, "save_button", "android.widget.Button", Some("Save"), 4_000),
        ],
    }
}

/// Writes `repo/`, `planted-trace.json` and a one-entry `planted.jsonl`
/// under `dir`, returning the manifest path.
pub fn write_planted_dataset(dir: &Path) -> io::Result<PathBuf> {
    write_dataset(dir, "planted.jsonl", false)
}

/// Like [`write_planted_dataset`] plus two text-only bugs on the same repo,
/// written to `bugs.jsonl`.
pub fn write_three_bug_dataset(dir: &Path) -> io::Result<PathBuf> {
    write_dataset(dir, "bugs.jsonl", true)
}

fn write_dataset(dir: &Path, name: &str, extra: bool) -> io::Result<PathBuf> {
    write_planted_repo(&dir.join("repo"))?;
    fs::write(dir.join("planted-trace.json"), planted_trace().to_json())?;
    let mut records = vec![json!({
        "bug_id": "notes-1",
        "corpus_path": "repo",
        "report_text": PLANTED_REPORT,
        "trace_path": "planted-trace.json",
        "ground_truth": [PLANTED_TRUTH],
    })];
    if extra {
        records.push(json!({
            "bug_id": "notes-2",
            "corpus_path": "repo",
            "report_text": "Sync keeps retrying forever when the queue throws a sync exception",
            "ground_truth": ["app/src/main/java/org/notes/sync/SyncService.java"],
        }));
        records.push(json!({
            "bug_id": "notes-3",
            "corpus_path": "repo",
            "report_text": "Markdown export drops the note title",
            "ground_truth": ["app/src/main/java/org/notes/model/Note.java"],
        }));
    }
    let manifest = dir.join(name);
    let body: String = records.iter().map(|r| format!("{r}\n")).collect();
    fs::write(&manifest, body)?;
    Ok(manifest)
}

const PREFIXES: &[&str] = &[
    "account", "album", "alarm", "anchor", "badge", "banner", "battery", "beacon", "bookmark", "border", "bridge",
    "budget", "cache", "camera", "canvas", "caption", "cargo", "carousel", "cart", "chart", "cipher", "cluster",
    "compass", "contact", "coupon", "cursor", "dialog", "docket", "draft", "drawer", "emblem", "filter", "folder",
    "fragment", "gallery", "garden", "gesture", "glyph", "harbor", "header",
];

const SUFFIXES: &[&str] = &[
    "adapter", "binder", "builder", "cleaner", "counter", "decoder", "encoder", "factory", "fetcher", "finder",
    "formatter", "gateway", "guard", "handler", "helper", "holder", "inspector", "keeper", "loader", "locator",
    "manager", "mapper", "merger", "monitor", "observer", "parser", "planner", "printer", "reader", "recorder",
    "registry", "renderer", "resolver", "scanner", "scheduler", "sorter", "tracker", "validator", "watcher",
    "writer",
];

fn capitalize(word: &str) -> String {
    let mut c = word.chars();
    match c.next() {
        Some(f) => f.to_ascii_uppercase().to_string() + c.as_str(),
        None => String::new(),
    }
}

fn identifier(rng: &mut ChaCha8Rng) -> String {
    let p = PREFIXES.choose(rng).expect("nonempty");
    let s = SUFFIXES.choose(rng).expect("nonempty");
    format!("{p}{}", capitalize(s))
}

/// Writes `files` random Java classes under `root`, reproducibly from `seed`.
pub fn generate_corpus(root: &Path, files: usize, seed: u64) -> io::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..files {
        let package = format!("p{}", i % 25);
        let class = format!("{}{i}", capitalize(&identifier(&mut rng)));
        let mut body = String::new();
        for _ in 0..rng.gen_range(3..8) {
            let method = identifier(&mut rng);
            body.push_str(&format!("    public void {method}() {{\n"));
            for _ in 0..rng.gen_range(2..6) {
                body.push_str(&format!(
                    "        {}.{}({});\n",
                    identifier(&mut rng),
                    identifier(&mut rng),
                    identifier(&mut rng)
                ));
            }
            body.push_str("    }\n\n");
        }
        let dir = root.join("src/main/java/gen").join(&package);
        fs::create_dir_all(&dir)?;
        fs::write(
            dir.join(format!("{class}.java")),
            format!("package gen.{package};\n\nimport java.util.List;\n\npublic class {class} {{\n{body}}}\n"),
        )?;
    }
    Ok(())
}

/// A report mixing words from the generated vocabulary.
pub fn generated_report(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words: Vec<String> = (0..12)
        .map(|_| {
            if rng.gen_bool(0.5) {
                PREFIXES.choose(&mut rng).expect("nonempty").to_string()
            } else {
                SUFFIXES.choose(&mut rng).expect("nonempty").to_string()
            }
        })
        .collect();
    format!("Crash in {}", words.join(" "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::snapshot_repository;

    #[test]
    fn planted_repo_has_twelve_files_and_one_screen_mention() {
        let dir = tempfile::tempdir().unwrap();
        write_planted_repo(dir.path()).unwrap();
        let snapshot = snapshot_repository(dir.path()).unwrap();
        assert_eq!(snapshot.file_count(), 12);
        let mentioning: Vec<_> = snapshot
            .files
            .iter()
            .filter(|f| f.raw_text.contains("EditNoteActivity"))
            .map(|f| f.relative_path.as_str())
            .collect();
        assert_eq!(mentioning, [PLANTED_TRUTH]);
    }

    #[test]
    fn planted_trace_round_trips() {
        let trace = planted_trace();
        assert_eq!(trace.steps.len(), 3);
        assert_eq!(crate::trace::parse_trace(&trace.to_json()).unwrap(), trace);
    }

    #[test]
    fn generated_corpus_is_reproducible() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        generate_corpus(a.path(), 20, 7).unwrap();
        generate_corpus(b.path(), 20, 7).unwrap();
        let sa = snapshot_repository(a.path()).unwrap();
        let sb = snapshot_repository(b.path()).unwrap();
        assert_eq!(sa.file_count(), 20);
        assert_eq!(sa.commit_id, sb.commit_id);
    }
}
