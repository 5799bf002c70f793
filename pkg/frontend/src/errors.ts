/** Typed failures surfaced by figure jobs. */

export class SchemaMismatch extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaMismatch";
  }
}

export class MissingSeries extends Error {
  constructor(message: string) {
    super(message);
    this.name = "MissingSeries";
  }
}
