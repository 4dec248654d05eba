class Filters {
    List<String> titles(List<Note> notes) {
        return notes.stream()
            .filter(n -> !n.isArchived() && n.getTitle() != null)
            .map(Note::getTitle)
            .sorted((a, b) -> a.compareToIgnoreCase(b))
            .collect(Collectors.toList());
    }
}
