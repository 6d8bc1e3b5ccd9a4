// Exactly-two selection state for the six-choice task, plus the running
// triplet counter. The counter only ever adds server-reported values.

export interface ToggleResult {
  selected: string[];
  blocked?: string;
}

export class TwoPick {
  private picks: string[] = [];

  toggle(id: string): ToggleResult {
    const at = this.picks.indexOf(id);
    if (at >= 0) {
      this.picks.splice(at, 1);
      return { selected: [...this.picks] };
    }
    if (this.picks.length >= 2) {
      return {
        selected: [...this.picks],
        blocked: "two candidates are already selected; unselect one first",
      };
    }
    this.picks.push(id);
    return { selected: [...this.picks] };
  }

  get selected(): string[] {
    return [...this.picks];
  }

  canSubmit(): boolean {
    return this.picks.length === 2;
  }

  submitBlockedReason(): string | null {
    return this.canSubmit() ? null : `select exactly 2 candidates (${this.picks.length} selected)`;
  }

  asPair(): [string, string] {
    if (!this.canSubmit()) throw new Error("selection incomplete");
    return [this.picks[0], this.picks[1]];
  }

  reset(): void {
    this.picks = [];
  }
}

export class TripletCounter {
  private total = 0;

  /** Add a server-reported triplet count; client-side math is not allowed. */
  addFromServer(reportedCount: number): number {
    this.total += reportedCount;
    return this.total;
  }

  get value(): number {
    return this.total;
  }
}
